#include "gazeprompt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

const PageLayout* LayoutHistory::at(int version) const {
    if (by_version_.empty()) return nullptr;
    auto it = by_version_.upper_bound(version);
    if (it == by_version_.begin()) return &it->second;
    return &std::prev(it)->second;
}

std::vector<std::vector<ScrollEvent>> segment_scrolls(std::span<const ScrollEvent> scrolls,
                                                      Micros pause_gap) {
    std::vector<ScrollEvent> sorted(scrolls.begin(), scrolls.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScrollEvent& a, const ScrollEvent& b) { return a.t < b.t; });
    std::vector<std::vector<ScrollEvent>> out;
    for (const auto& s : sorted) {
        if (out.empty() || s.t - out.back().back().t > pause_gap) out.emplace_back();
        out.back().push_back(s);
    }
    return out;
}

namespace {

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

}  // namespace

PassageMetrics compute_metrics(const MetricsInput& input, const LayoutHistory& layouts,
                               const GroundTruth* truth, Micros scroll_pause_gap) {
    if (layouts.empty()) throw Error(ErrorCode::no_layout, "metrics need a layout");
    PassageMetrics m;
    m.line_count = layouts.first().lines.size();
    if (input.fixations.empty() && input.scrolls.empty() && input.total_samples == 0) {
        m.warnings.push_back("empty log");
        return m;
    }

    const auto& fx = input.fixations;
    std::vector<LineId> line_of(fx.size());
    std::vector<std::optional<WordId>> word_of(fx.size());
    for (std::size_t i = 0; i < fx.size(); ++i) {
        const PageLayout* layout = layouts.at(fx[i].layout_version);
        if (layout->lines.empty()) throw Error(ErrorCode::no_layout, "layout has no lines");
        line_of[i] = cast_vote(fx[i], *layout).landing_line;
        word_of[i] = assign_word(fx[i].cx, line_of[i], *layout);
    }

    // Landing fixation of each sweep event.
    std::vector<std::pair<std::size_t, const BehaviorEvent*>> sweeps;
    for (const auto& ev : input.behaviors) {
        if (ev.kind != BehaviorKind::switch_return_sweep) continue;
        auto it = std::find_if(fx.begin(), fx.end(), [&](const Fixation& f) { return f.onset == ev.at; });
        if (it == fx.end() || it == fx.begin()) {
            m.warnings.push_back("sweep event without a matching fixation pair");
            continue;
        }
        sweeps.emplace_back(static_cast<std::size_t>(it - fx.begin()), &ev);
    }

    std::vector<double> switch_times;
    std::vector<double> magnitudes;
    for (std::size_t s = 0; s < sweeps.size(); ++s) {
        const auto [landing, ev] = sweeps[s];
        const LineId from = ev->from_line.value_or(line_of[landing - 1]);
        LineId target = from + 1;
        if (truth && !truth->sweeps.empty()) {
            const TruthSweep* best = nullptr;
            Micros best_dt = std::numeric_limits<Micros>::max();
            for (const auto& ts : truth->sweeps) {
                const Micros dt = std::abs(ts.at - ev->at);
                if (dt < best_dt) {
                    best = &ts;
                    best_dt = dt;
                }
            }
            target = best->target_line;
        }
        if (ev->line_id != target) {
            DetectedDeviation d{ev->line_id, target, ev->at};
            m.deviations.push_back(d);
            magnitudes.push_back(d.magnitude());
        }

        LineSwitch sw;
        sw.from_line = from;
        sw.target_line = target;
        sw.end_of_line_offset = fx[landing - 1].offset();
        const std::size_t stop = s + 1 < sweeps.size() ? sweeps[s + 1].first : fx.size();
        for (std::size_t i = landing; i + 1 < stop; ++i) {
            if (line_of[i] == target && line_of[i + 1] == target &&
                fx[i + 1].cx >= fx[i].cx - kForwardSlackPx) {
                sw.settled_onset = fx[i].onset;
                break;
            }
        }
        if (sw.settled_onset) switch_times.push_back(sw.time_ms());
        m.line_switches.push_back(sw);
    }
    m.mean_line_switch_time_ms = mean(switch_times);
    if (m.line_count > 0)
        m.deviation_frequency = static_cast<double>(m.deviations.size()) / static_cast<double>(m.line_count);
    m.mean_deviation_magnitude_lines = mean(magnitudes);

    // First pass per word: consecutive fixations on it before gaze leaves.
    for (std::size_t i = 0; i < fx.size();) {
        std::size_t j = i + 1;
        Micros total = fx[i].duration;
        while (j < fx.size() && word_of[j] == word_of[i] && line_of[j] == line_of[i]) total += fx[j++].duration;
        if (word_of[i] && !m.one_pass_ms.count(*word_of[i]))
            m.one_pass_ms[*word_of[i]] = static_cast<double>(total) / 1000.0;
        i = j;
    }
    const PageLayout& base = layouts.first();
    for (const auto& [word, ms] : m.one_pass_ms) {
        const WordBox* w = base.find_word(word);
        if (w && w->function_word) continue;
        if (!m.max_one_pass_word || ms > m.max_one_pass_fixation_ms) {
            m.max_one_pass_fixation_ms = ms;
            m.max_one_pass_word = word;
        }
    }

    for (const auto& seg : segment_scrolls(input.scrolls, scroll_pause_gap)) {
        double sum = 0.0;
        for (const auto& s : seg) sum += s.dy;
        m.scroll_distances_px.push_back(std::abs(sum));
    }
    m.scroll_event_count = m.scroll_distances_px.size();
    m.mean_scroll_distance_px = mean(m.scroll_distances_px);

    if (input.total_samples > 0)
        m.data_loss_fraction =
            static_cast<double>(input.invalid_samples) / static_cast<double>(input.total_samples);
    return m;
}

}  // namespace gazeprompt
