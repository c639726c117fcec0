#include "gazeprompt/pipeline.hpp"

#include <chrono>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

Pipeline::Pipeline(const PipelineOptions& opts)
    : opts_(opts),
      filter_(opts.engine, opts.geometry),
      detector_(opts.engine),
      behavior_(opts.engine),
      augment_(opts.augmentation, opts.viewport) {
    opts_.engine.validate();
    opts_.geometry.validate();
    opts_.augmentation.validate();
}

std::vector<PipelineEvent> Pipeline::push(const GazeSample& s) {
    const auto start = opts_.record_latency ? std::chrono::steady_clock::now()
                                            : std::chrono::steady_clock::time_point{};
    std::vector<PipelineEvent> out;
    for (const auto& fs : filter_.push(s)) on_filtered(fs, out);
    if (opts_.record_latency) {
        const auto end = std::chrono::steady_clock::now();
        latencies_.push_back(std::chrono::duration<double, std::micro>(end - start).count());
    }
    return out;
}

std::vector<PipelineEvent> Pipeline::flush() {
    std::vector<PipelineEvent> out;
    for (const auto& fs : filter_.flush()) on_filtered(fs, out);
    if (auto f = detector_.flush()) on_fixation(*f, out);
    return out;
}

void Pipeline::on_filtered(const FilteredSample& fs, std::vector<PipelineEvent>& out) {
    FilteredSample corrected = fs;
    if (drift_) corrected.sample = correct_drift(fs.sample, *drift_);
    if (auto f = detector_.push(corrected)) on_fixation(*f, out);
}

void Pipeline::on_fixation(const Fixation& fix, std::vector<PipelineEvent>& out) {
    out.emplace_back(fix);
    if (!layout_ || layout_->lines.empty()) return;
    if (auto d = augment_.on_fixation_for_magnifier(fix)) out.emplace_back(*d);
    for (const auto& ev : behavior_.on_fixation(fix, *layout_)) {
        out.emplace_back(ev);
        for (auto& a : augment_.on_behavior(ev, *layout_)) out.emplace_back(std::move(a));
    }
}

std::vector<PipelineEvent> Pipeline::set_layout(const PageLayout& layout, double scroll_dy,
                                                const IdMap* line_map, const IdMap* word_map,
                                                Micros at) {
    if (auto v = validate_layout(layout); !v.empty())
        throw Error(ErrorCode::no_layout, "invalid layout: " + v.front().message);
    std::vector<PipelineEvent> out;
    if (layout_ && layout.layout_version <= layout_->layout_version)
        throw Error(ErrorCode::protocol, "layout version " + std::to_string(layout.layout_version) +
                                             " does not advance past " +
                                             std::to_string(layout_->layout_version));

    const bool successor = layout_ && layout.layout_version == layout_->layout_version + 1;
    if (successor) {
        filter_.translate(scroll_dy);
        detector_.translate(scroll_dy);
        behavior_.on_layout_change(layout, scroll_dy, line_map, word_map);
        for (auto& a : augment_.on_layout_change(layout, line_map, at)) out.emplace_back(std::move(a));
    } else {
        behavior_.adopt_layout(layout.layout_version);
        if (layout_)
            for (auto& a : augment_.on_layout_change(layout, nullptr, at)) out.emplace_back(std::move(a));
    }
    detector_.set_layout_version(layout.layout_version);
    layout_ = layout;
    return out;
}

void Pipeline::set_drift_profile(std::optional<DriftProfile> profile) {
    if (profile) profile->validate();
    drift_ = std::move(profile);
}

void Pipeline::set_engine_config(const EngineConfig& cfg) {
    cfg.validate();
    opts_.engine = cfg;
    behavior_.set_config(cfg);
}

std::vector<PipelineEvent> Pipeline::set_augmentation_config(const AugmentationConfig& cfg, Micros at) {
    cfg.validate();
    opts_.augmentation = cfg;
    std::vector<PipelineEvent> out;
    for (auto& a : augment_.set_config(cfg, at)) out.emplace_back(std::move(a));
    return out;
}

}  // namespace gazeprompt
