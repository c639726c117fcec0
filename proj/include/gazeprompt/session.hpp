#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazeprompt/calibration.hpp"
#include "gazeprompt/json_io.hpp"
#include "gazeprompt/metrics.hpp"
#include "gazeprompt/pipeline.hpp"

namespace gazeprompt {

inline constexpr int kDefaultPort = 7327;
inline constexpr Micros kDefaultStallTimeoutUs = 2 * kMicrosPerSecond;

enum class Phase { configuring, calibrating, validating, reading, ended };

const char* to_string(Phase phase);
std::optional<Phase> phase_from_string(const std::string& s);

struct SessionSettings {
    EngineConfig engine;
    AugmentationConfig augmentation;
    ScreenGeometry geometry = ScreenGeometry::study_default();
    Viewport viewport;
    Micros stall_timeout_us = kDefaultStallTimeoutUs;
    bool debug_fixations = true;
};

Json to_json(const SessionSettings& s);
// Accepts {"engine", "augmentation", "geometry", "viewport", "stall_timeout_us", "debug_fixations"}.
SessionSettings session_settings_from_json(const Json& j, const SessionSettings& base = {});
// Reads the file named by GAZEPROMPT_CONFIG when set, else defaults.
SessionSettings load_settings(const std::optional<std::string>& path);

// Append-only record of one session: a header line with the settings, then every
// inbound line, timer tick and outbound message in order. Serialized as JSON lines.
class SessionLog {
public:
    SessionLog(std::string session_id, const SessionSettings& settings);

    void inbound(std::string_view raw, Micros wall_us);
    void tick(Micros wall_us);
    void transport_error(const std::string& message, Micros wall_us);
    void outbound(const Json& msg);

    const std::vector<std::string>& lines() const { return lines_; }
    std::string text() const;

private:
    std::vector<std::string> lines_;
};

struct ReplayResult {
    std::string session_id;
    SessionSettings settings;
    std::vector<std::string> recorded_outbound;  // serialized messages in the log
    std::vector<std::string> replayed_outbound;
    std::string replayed_log;
    MetricsInput metrics_input;
    LayoutHistory layouts;
    bool identical() const { return recorded_outbound == replayed_outbound; }
};

// One client session: protocol parsing, phases, calibration steps and the reading
// pipeline. Not thread-safe; feed it from a single context.
class Session {
public:
    explicit Session(std::string session_id, const SessionSettings& settings = {});

    // Handles one newline-free inbound line. Returns outbound messages in order.
    std::vector<Json> handle_line(std::string_view line, Micros wall_us);
    // Timer callback for stall detection.
    std::vector<Json> tick(Micros wall_us);
    // Framing failure reported by the transport; ends the session.
    std::vector<Json> transport_error(const std::string& message, Micros wall_us);

    bool ended() const { return phase_ == Phase::ended; }
    Phase phase() const { return phase_; }
    const std::string& id() const { return id_; }
    const SessionLog& log() const { return log_; }
    const Pipeline* pipeline() const { return pipeline_ ? &*pipeline_ : nullptr; }
    const std::optional<DriftProfile>& installed_drift() const { return installed_drift_; }
    std::optional<Eye> selected_eye() const { return selected_eye_; }
    bool paused() const { return paused_; }
    const MetricsInput& metrics_input() const { return metrics_input_; }
    const LayoutHistory& layouts() const { return layouts_; }
    // Per-sample pipeline latencies in microseconds.
    std::vector<double> latencies_us() const;

private:
    struct Step {
        TargetKind kind;
        std::map<int, std::vector<GazeSample>> samples;  // by target index
    };

    void dispatch(const Json& msg, std::vector<Json>& out);
    void on_hello(const Json& payload, std::vector<Json>& out);
    void on_configure(const Json& payload, std::vector<Json>& out);
    void on_layout(const Json& payload, std::vector<Json>& out);
    void on_gaze(const Json& payload, std::vector<Json>& out);
    void on_scroll(const Json& payload, std::vector<Json>& out);
    void on_phase(const Json& payload, std::vector<Json>& out);

    void accept_sample(const GazeSample& s, std::optional<int> target, std::vector<Json>& out);
    void finish_step(std::vector<Json>& out);
    void ensure_pipeline();
    void emit_events(const std::vector<PipelineEvent>& events, std::vector<Json>& out);
    void end_session(std::vector<Json>& out);

    Json envelope(const std::string& type, Json payload);
    void error(std::vector<Json>& out, const std::string& code, const std::string& message, bool fatal,
               std::optional<std::int64_t> in_reply_to = std::nullopt);

    std::string id_;
    SessionSettings settings_;
    SessionLog log_;
    Phase phase_ = Phase::configuring;
    bool calibration_validated_ = false;
    bool reading_entered_ = false;

    std::optional<std::int64_t> last_in_seq_;
    std::int64_t out_seq_ = 0;
    std::optional<std::int64_t> current_seq_;

    std::optional<Step> step_;
    std::optional<DriftProfile> fitted_drift_;
    std::optional<DriftProfile> installed_drift_;
    std::optional<Eye> selected_eye_;

    std::optional<Pipeline> pipeline_;
    std::optional<PageLayout> pending_layout_;
    std::optional<Micros> last_sample_t_;
    LayoutHistory layouts_;
    MetricsInput metrics_input_;

    Micros last_in_wall_ = 0;
    std::optional<Micros> last_gaze_wall_;
    bool paused_ = false;
};

// Re-runs a serialized session log and compares the outbound stream.
ReplayResult replay_session_log(std::string_view log_text);

// Sample producer for run_session.
class GazeSource {
public:
    virtual ~GazeSource() = default;
    virtual std::optional<GazeSample> next() = 0;
};

class VectorSource : public GazeSource {
public:
    explicit VectorSource(std::vector<GazeSample> samples) : samples_(std::move(samples)) {}
    std::optional<GazeSample> next() override {
        if (pos_ >= samples_.size()) return std::nullopt;
        return samples_[pos_++];
    }

private:
    std::vector<GazeSample> samples_;
    std::size_t pos_ = 0;
};

// Boundary for a vendor tracker driver. Implementations push samples from the driver's
// callback thread; next() blocks until a sample is available or the stream ends.
class LiveSourceAdapter : public GazeSource {
public:
    virtual bool connect() = 0;
    virtual void disconnect() = 0;
    virtual double sample_rate_hz() const = 0;
};

struct ScheduledLayout {
    Micros before_t = 0;  // delivered before the first sample with t >= before_t
    PageLayout layout;
    double scroll_dy = 0.0;
    std::optional<IdMap> line_map;
    std::optional<IdMap> word_map;
};

struct RunOptions {
    SessionSettings settings;
    std::string session_id = "local";
    PageLayout layout;
    std::vector<ScheduledLayout> layout_changes;
    // Wall clock stamped on inbound lines; defaults to the sample timestamp.
    std::function<Micros(const GazeSample&)> wall_clock;
    // Receives the per-sample pipeline latencies when set.
    std::vector<double>* latencies_us = nullptr;
};

// Scroll and layout messages reproducing the scrolls recorded in a simulator ground truth.
// Scrolls keep line and word ids, so the maps are identities.
std::vector<ScheduledLayout> layout_schedule(const PageLayout& base, const GroundTruth& truth);

// Drives a Session with a reading script: hello, layout, reading (calibration skipped),
// one gaze message per sample with scheduled scroll/layout messages in between, end.
// Outbound messages go to sink.
SessionLog run_session(GazeSource& source, const std::function<void(const Json&)>& sink,
                       const RunOptions& options);

// Client-side message builder used by run_session, tests and tools.
std::string make_message(const std::string& type, std::int64_t seq, const Json& payload,
                         const std::string& session = "local");
Json layout_payload(const PageLayout& layout, double scroll_dy = 0.0, const IdMap* line_map = nullptr,
                    const IdMap* word_map = nullptr);

}  // namespace gazeprompt
