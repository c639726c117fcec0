#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gazeprompt/types.hpp"

namespace gazeprompt {

struct FilteredSample {
    GazeSample sample;
    // Set on the first sample after a validity gap longer than the blink-merge window.
    bool gap_break = false;
};

// Online conditioning of the raw stream: invalid samples are dropped, valid ones are
// replaced by the per-axis median of a centred window (delay of (W-1)/2 samples), and
// medians implying an eye velocity above the physiological cap are dropped.
class SampleFilter {
public:
    SampleFilter(const EngineConfig& cfg, const ScreenGeometry& geom);

    // Throws Error(stream_order) when t does not increase.
    std::vector<FilteredSample> push(const GazeSample& s);
    std::vector<FilteredSample> flush();

    // Shift buffered samples after the page content moved by dy.
    void translate(double dy);

    std::size_t received() const { return received_; }
    std::size_t invalid() const { return invalid_; }
    std::size_t outliers() const { return outliers_; }
    std::size_t emitted() const { return emitted_; }
    // Microseconds of invalid stream since the last valid sample.
    Micros gap_accumulator() const { return gap_us_; }

private:
    void emit_position(std::size_t pos, std::vector<FilteredSample>& out);
    void finish_segment(std::vector<FilteredSample>& out);

    int half_window_;
    Micros period_us_;
    Micros blink_merge_us_;
    double max_px_per_us_;
    double width_;
    double height_;

    std::vector<GazeSample> segment_;  // raw valid samples still needed for medians
    std::size_t next_emit_ = 0;        // index into segment_
    bool break_pending_ = false;

    std::optional<Micros> last_t_;
    std::optional<Micros> last_valid_t_;
    std::optional<GazeSample> last_emitted_;
    Micros gap_us_ = 0;

    std::size_t received_ = 0;
    std::size_t invalid_ = 0;
    std::size_t outliers_ = 0;
    std::size_t emitted_ = 0;
};

// Dispersion-threshold (I-DT style) online segmentation into fixations.
class FixationDetector {
public:
    explicit FixationDetector(const EngineConfig& cfg);

    std::optional<Fixation> push(const FilteredSample& s);
    std::optional<Fixation> flush();

    void translate(double dy);
    void set_layout_version(int version) { layout_version_ = version; }

    bool open() const { return count_ > 0; }
    double open_dispersion() const;

    std::size_t fed() const { return fed_; }
    std::size_t in_fixations() const { return in_fixations_; }
    std::size_t discarded() const { return discarded_; }

private:
    std::optional<Fixation> close();
    void start(const GazeSample& s);

    double max_dispersion_;
    Micros min_duration_;
    int layout_version_ = 0;

    int count_ = 0;
    double sum_x_ = 0.0, sum_y_ = 0.0;
    double min_x_ = 0.0, max_x_ = 0.0, min_y_ = 0.0, max_y_ = 0.0;
    Micros onset_ = 0;
    Micros last_t_ = 0;

    std::size_t fed_ = 0;
    std::size_t in_fixations_ = 0;
    std::size_t discarded_ = 0;
};

struct SignalSummary {
    std::vector<Fixation> fixations;
    std::size_t total = 0;
    std::size_t invalid = 0;
    std::size_t outliers = 0;
    std::size_t in_fixations = 0;
    std::size_t discarded = 0;
};

// Runs the streaming filter and detector over a buffered stream and flushes.
SignalSummary detect_fixations(std::span<const GazeSample> samples, const EngineConfig& cfg,
                               const ScreenGeometry& geom);

}  // namespace gazeprompt
