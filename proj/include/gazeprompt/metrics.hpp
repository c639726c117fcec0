#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazeprompt/behavior.hpp"
#include "gazeprompt/simulator.hpp"
#include "gazeprompt/types.hpp"

namespace gazeprompt {

// Layouts of one passage keyed by version.
class LayoutHistory {
public:
    LayoutHistory() = default;
    explicit LayoutHistory(const PageLayout& base) { add(base); }

    void add(const PageLayout& layout) { by_version_[layout.layout_version] = layout; }
    // The layout with this version, else the latest one before it, else the earliest.
    const PageLayout* at(int version) const;
    bool empty() const { return by_version_.empty(); }
    const PageLayout& first() const { return by_version_.begin()->second; }

private:
    std::map<int, PageLayout> by_version_;
};

struct MetricsInput {
    std::vector<Fixation> fixations;
    std::vector<BehaviorEvent> behaviors;
    std::vector<ScrollEvent> scrolls;
    std::size_t total_samples = 0;
    std::size_t invalid_samples = 0;
};

struct LineSwitch {
    LineId from_line = 0;
    LineId target_line = 0;
    Micros end_of_line_offset = 0;
    std::optional<Micros> settled_onset;  // unset when the reader never settled on the target
    double time_ms() const {
        return settled_onset ? static_cast<double>(*settled_onset - end_of_line_offset) / 1000.0 : 0.0;
    }
};

struct DetectedDeviation {
    LineId landed_line = 0;
    LineId target_line = 0;
    Micros at = 0;
    int magnitude() const { return landed_line > target_line ? landed_line - target_line : target_line - landed_line; }
};

struct PassageMetrics {
    std::size_t line_count = 0;
    std::vector<LineSwitch> line_switches;
    double mean_line_switch_time_ms = 0.0;

    std::vector<DetectedDeviation> deviations;
    double deviation_frequency = 0.0;
    double mean_deviation_magnitude_lines = 0.0;

    std::map<WordId, double> one_pass_ms;  // first-pass fixation time per word
    double max_one_pass_fixation_ms = 0.0;  // over content words
    std::optional<WordId> max_one_pass_word;

    std::vector<double> scroll_distances_px;
    std::size_t scroll_event_count = 0;
    double mean_scroll_distance_px = 0.0;

    double data_loss_fraction = 0.0;
    std::vector<std::string> warnings;
};

inline constexpr double kForwardSlackPx = 10.0;

// Groups scroll inputs separated by pauses longer than pause_gap.
std::vector<std::vector<ScrollEvent>> segment_scrolls(std::span<const ScrollEvent> scrolls,
                                                      Micros pause_gap = 100'000);

// Intent for each sweep comes from the nearest ground-truth sweep when truth is given,
// else the line after the one being read. Throws Error(no_layout) on an empty history.
PassageMetrics compute_metrics(const MetricsInput& input, const LayoutHistory& layouts,
                               const GroundTruth* truth = nullptr, Micros scroll_pause_gap = 100'000);

}  // namespace gazeprompt
