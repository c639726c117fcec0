#pragma once

#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gazeprompt/types.hpp"

namespace gazeprompt {

enum class BehaviorKind { following, switch_return_sweep, jump, difficult_word };
enum class DwTrigger { first_fixation, refixations, total_duration };

const char* to_string(BehaviorKind kind);
const char* to_string(DwTrigger trigger);

struct BehaviorEvent {
    BehaviorKind kind = BehaviorKind::following;
    LineId line_id = 0;
    std::optional<LineId> from_line;
    std::optional<WordId> word_id;
    std::optional<DwTrigger> trigger;
    Micros at = 0;  // onset of the fixation that produced the event
    int layout_version = 0;
};

struct LineVote {
    LineId landing_line = 0;
    double normalized_distance = 0.0;
    double weight = 0.0;
};

// Landing line is the line whose vertical centre is nearest to the fixation
// (lower id on an exact tie); d = (f_y - m) / (h / 2), w = 1 / (1 + |d|).
LineVote cast_vote(const Fixation& fix, const PageLayout& layout);

struct LineIdentification {
    LineId line = 0;
    std::vector<LineVote> votes;      // one per fixation, oldest first
    std::map<LineId, double> totals;  // summed weight per line
};

// Weighted vote over the given fixations (oldest first). Ties go to the tied line
// voted for most recently. Throws Error(no_layout) on a layout without lines.
LineIdentification identify_line(std::span<const Fixation> fixations, const PageLayout& layout);

struct LineTracker {
    std::deque<Fixation> window;  // latest vote_window fixations
    std::optional<LineId> current_line;
    std::optional<LineId> pending_line;
    int pending_count = 0;
    std::optional<LineId> last_identified;

    void reset() {
        window.clear();
        current_line.reset();
        pending_line.reset();
        pending_count = 0;
        last_identified.reset();
    }
};

struct SweepCriteria {
    bool leftward_jump = false;   // prev.cx - next.cx > T_LS0
    bool left_portion = false;    // next.cx < text left + T_LS1 fraction * text width
    bool line_apart = false;      // next.cy - prev.cy > line box height

    bool all() const { return leftward_jump && left_portion && line_apart; }
};

SweepCriteria check_return_sweep(const Fixation& prev, const Fixation& next,
                                 const PageLayout& layout, const EngineConfig& cfg);

// Advances the tracker with `next`. prev is null for the first fixation of a stream,
// which seeds the tracker and reports `following`. Throws Error(stale_fixation) when the
// fixations do not refer to the layout's version.
std::optional<BehaviorEvent> classify_transition(const Fixation* prev, const Fixation& next,
                                                 LineTracker& tracker, const PageLayout& layout,
                                                 const EngineConfig& cfg);

struct WordPass {
    WordId word_id = 0;
    Micros first_fixation_duration = 0;
    int refixation_count = 0;
    Micros total_duration = 0;
    bool open = false;
    bool fired = false;
};

// Word under cx on a line: the containing word, else the one with the nearest edge
// (ties to the left word).
std::optional<WordId> assign_word(double cx, LineId line, const PageLayout& layout);

std::optional<BehaviorEvent> track_word_pass(const Fixation& fix, WordId word, LineId line,
                                             const PageLayout& layout, WordPass& pass,
                                             const EngineConfig& cfg);

// Line tracking plus difficult-word detection over one session's fixation stream.
class BehaviorEngine {
public:
    explicit BehaviorEngine(const EngineConfig& cfg);

    std::vector<BehaviorEvent> on_fixation(const Fixation& fix, const PageLayout& layout);

    // new_layout must carry the next layout version. scroll_dy is the on-screen
    // displacement of the content (+down). Without a line map the tracker resets;
    // without a word map (or when the open word is missing from it) the pass closes.
    void on_layout_change(const PageLayout& new_layout, double scroll_dy, const IdMap* line_map,
                          const IdMap* word_map);

    void set_config(const EngineConfig& cfg) { cfg_ = cfg; }
    const EngineConfig& config() const { return cfg_; }
    const LineTracker& tracker() const { return tracker_; }
    const WordPass& word_pass() const { return pass_; }
    std::optional<int> layout_version() const { return layout_version_; }
    void reset();
    // Starts over on an unrelated page.
    void adopt_layout(int version) {
        reset();
        layout_version_ = version;
    }

private:
    EngineConfig cfg_;
    LineTracker tracker_;
    std::optional<Fixation> previous_;
    WordPass pass_;
    std::optional<int> layout_version_;
};

}  // namespace gazeprompt
