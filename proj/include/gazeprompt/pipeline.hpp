#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "gazeprompt/augmentation.hpp"
#include "gazeprompt/behavior.hpp"
#include "gazeprompt/calibration.hpp"
#include "gazeprompt/signal.hpp"
#include "gazeprompt/types.hpp"

namespace gazeprompt {

struct PipelineOptions {
    EngineConfig engine;
    AugmentationConfig augmentation;
    ScreenGeometry geometry = ScreenGeometry::study_default();
    Viewport viewport;
    bool record_latency = false;
};

using PipelineEvent = std::variant<Fixation, BehaviorEvent, AugmentationEvent>;

// filter -> drift correction -> fixation detection -> behavior -> augmentation,
// for one session's in-order sample stream.
class Pipeline {
public:
    explicit Pipeline(const PipelineOptions& opts);

    std::vector<PipelineEvent> push(const GazeSample& s);
    // Drains the filter and closes the open fixation.
    std::vector<PipelineEvent> flush();

    // Installs a layout. The version must increase. The immediate successor version is
    // treated as a change of the current page (scroll_dy and maps apply); any other
    // version replaces the page and resets line tracking.
    std::vector<PipelineEvent> set_layout(const PageLayout& layout, double scroll_dy = 0.0,
                                          const IdMap* line_map = nullptr,
                                          const IdMap* word_map = nullptr, Micros at = 0);

    void set_drift_profile(std::optional<DriftProfile> profile);
    // Behavior thresholds only; signal parameters are fixed at construction.
    void set_engine_config(const EngineConfig& cfg);
    std::vector<PipelineEvent> set_augmentation_config(const AugmentationConfig& cfg, Micros at);
    void set_viewport(const Viewport& viewport) { augment_.set_viewport(viewport); }

    const std::optional<PageLayout>& layout() const { return layout_; }
    const std::optional<DriftProfile>& drift_profile() const { return drift_; }
    const EngineConfig& engine_config() const { return opts_.engine; }
    const AugmentationConfig& augmentation_config() const { return augment_.config(); }
    const SampleFilter& filter() const { return filter_; }
    const FixationDetector& detector() const { return detector_; }
    const BehaviorEngine& behavior() const { return behavior_; }
    const AugmentationController& augmentation() const { return augment_; }

    // Wall-clock processing time of each push(), in microseconds, when enabled.
    const std::vector<double>& latencies_us() const { return latencies_; }

private:
    void on_filtered(const FilteredSample& fs, std::vector<PipelineEvent>& out);
    void on_fixation(const Fixation& fix, std::vector<PipelineEvent>& out);

    PipelineOptions opts_;
    SampleFilter filter_;
    FixationDetector detector_;
    BehaviorEngine behavior_;
    AugmentationController augment_;
    std::optional<PageLayout> layout_;
    std::optional<DriftProfile> drift_;
    std::vector<double> latencies_;
};

}  // namespace gazeprompt
