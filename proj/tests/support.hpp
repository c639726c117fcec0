#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gazeprompt/metrics.hpp"
#include "gazeprompt/pipeline.hpp"
#include "gazeprompt/session.hpp"
#include "gazeprompt/simulator.hpp"
#include "gazeprompt/text_layout.hpp"

namespace gptest {

using namespace gazeprompt;

inline Fixation fix_at(double x, double y, Micros onset = 0, Micros dur = 200'000, int version = 0) {
    Fixation f;
    f.cx = x;
    f.cy = y;
    f.onset = onset;
    f.duration = dur;
    f.sample_count = 24;
    f.layout_version = version;
    return f;
}

inline LineBox line_box(LineId id, double top, double h, double left = 100, double right = 1900) {
    return {id, top, top + h, left, right};
}

// One word spanning each line.
inline PageLayout lines_layout(const std::vector<LineBox>& lines) {
    PageLayout l;
    l.lines = lines;
    for (const auto& b : lines) {
        WordBox w;
        w.word_id = b.line_id;
        w.line_id = b.line_id;
        w.left = b.left;
        w.right = b.right;
        w.text = "word";
        l.words.push_back(w);
    }
    refresh_layout_metrics(l);
    return l;
}

// n lines of height h with the given pitch, starting at y = top.
inline PageLayout ruled_layout(int n, double h = 50.0, double pitch = 75.0, double top = 100.0) {
    std::vector<LineBox> boxes;
    for (int k = 0; k < n; ++k) boxes.push_back(line_box(k, top + k * pitch, h));
    return lines_layout(boxes);
}

// Generated passage cut to exactly `lines` lines.
inline PageLayout passage_layout(int lines, std::uint64_t seed, const TextStyle& style = {}) {
    PageLayout full = build_layout(random_passage(static_cast<std::size_t>(lines) * 16 + 20, seed), style);
    PageLayout out = full;
    out.lines.clear();
    out.words.clear();
    for (const auto& l : full.lines)
        if (l.line_id < lines) out.lines.push_back(l);
    for (const auto& w : full.words)
        if (w.line_id < lines) out.words.push_back(w);
    refresh_layout_metrics(out);
    return out;
}

struct SimRun {
    PageLayout layout;
    Simulation sim;
    std::vector<Fixation> fixations;
    std::vector<BehaviorEvent> behaviors;
    std::vector<AugmentationEvent> augments;
    // Line identified for each detected fixation (tracker state right after it).
    std::vector<std::optional<LineId>> identified;
    PassageMetrics metrics;
};

inline SimRun run_simulation(const PageLayout& layout, const ReaderProfile& profile, EngineConfig cfg = {},
                             AugmentationConfig aug = {}) {
    SimRun r;
    r.layout = layout;
    r.sim = simulate(layout, profile);
    cfg.sample_rate_hz = profile.sample_rate_hz;
    PipelineOptions opt;
    opt.engine = cfg;
    opt.augmentation = aug;
    Pipeline p(opt);
    p.set_layout(layout);
    LayoutHistory history(layout);
    MetricsInput in;
    const auto schedule = layout_schedule(layout, r.sim.truth);
    std::size_t next = 0;
    auto take = [&](std::vector<PipelineEvent> events) {
        for (auto& e : events) {
            if (auto* f = std::get_if<Fixation>(&e)) {
                r.fixations.push_back(*f);
                r.identified.push_back(p.behavior().tracker().last_identified);
            } else if (auto* b = std::get_if<BehaviorEvent>(&e)) {
                r.behaviors.push_back(*b);
            } else {
                r.augments.push_back(std::get<AugmentationEvent>(e));
            }
        }
    };
    for (const auto& s : r.sim.samples) {
        while (next < schedule.size() && schedule[next].before_t <= s.t) {
            const auto& ch = schedule[next++];
            take(p.set_layout(ch.layout, ch.scroll_dy, &*ch.line_map, &*ch.word_map, s.t));
            history.add(ch.layout);
            in.scrolls.push_back({ch.before_t, ch.scroll_dy});
        }
        take(p.push(s));
        ++in.total_samples;
        if (!s.valid) ++in.invalid_samples;
    }
    take(p.flush());
    in.fixations = r.fixations;
    in.behaviors = r.behaviors;
    r.metrics = compute_metrics(in, history, &r.sim.truth, cfg.scroll_pause_gap_us);
    return r;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << ']';
    return os.str();
}

// Empty when detection matches the script exactly, else a description of the first difference.
inline std::string compare_with_truth(const SimRun& r) {
    const GroundTruth& t = r.sim.truth;
    std::vector<std::string> got, want;
    auto differ = [&](const char* what) {
        return std::string(what) + ": detected " + join(got) + " truth " + join(want);
    };

    for (const auto& e : r.behaviors)
        if (e.kind == BehaviorKind::switch_return_sweep)
            got.push_back(std::to_string(*e.from_line) + ">" + std::to_string(e.line_id));
    for (const auto& s : t.sweeps) want.push_back(std::to_string(s.from_line) + ">" + std::to_string(s.landed_line));
    if (got != want) return differ("sweeps");

    got.clear();
    want.clear();
    for (const auto& e : r.behaviors)
        if (e.kind == BehaviorKind::jump)
            got.push_back(std::to_string(*e.from_line) + ">" + std::to_string(e.line_id));
    for (const auto& j : t.jumps) want.push_back(std::to_string(j.from_line) + ">" + std::to_string(j.line));
    if (got != want) return differ("jumps");

    got.clear();
    want.clear();
    for (const auto& e : r.behaviors)
        if (e.kind == BehaviorKind::difficult_word)
            got.push_back(std::to_string(*e.word_id) + ":" + to_string(*e.trigger));
    for (const auto& d : t.difficult_words) want.push_back(std::to_string(d.word) + ":" + to_string(d.trigger));
    if (got != want) return differ("difficult words");

    got.clear();
    want.clear();
    for (const auto& d : r.metrics.deviations)
        got.push_back(std::to_string(d.landed_line) + "/" + std::to_string(d.target_line));
    for (const auto& d : t.deviations)
        want.push_back(std::to_string(d.wrong_line) + "/" + std::to_string(d.target_line));
    if (got != want) return differ("deviations");
    return {};
}

// Detected fixations against scripted ones: equal count, centroids within tol px.
inline std::string compare_fixations(const SimRun& r, double tol = 1.0) {
    const auto& want = r.sim.truth.fixations;
    if (r.fixations.size() != want.size())
        return "fixation count " + std::to_string(r.fixations.size()) + " vs " + std::to_string(want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        // Centroids are in the coordinates of the layout version the fixation ended on.
        const PageLayout base = layout_at_version(r.layout, r.sim.truth, want[i].layout_version);
        const double dy = r.fixations[i].layout_version == want[i].layout_version
                              ? 0.0
                              : layout_at_version(r.layout, r.sim.truth, r.fixations[i].layout_version).lines[0].top -
                                    base.lines[0].top;
        if (std::abs(r.fixations[i].cx - want[i].x) > tol || std::abs(r.fixations[i].cy - (want[i].y + dy)) > tol)
            return "fixation " + std::to_string(i) + " off script";
    }
    return {};
}

// Fraction of detected fixations whose identified line is the line the reader was on.
inline double line_id_accuracy(const SimRun& r) {
    const auto& truth = r.sim.truth;
    std::size_t hit = 0, n = 0;
    for (std::size_t i = 0; i < r.fixations.size(); ++i) {
        const Fixation& f = r.fixations[i];
        const Micros mid = f.onset + f.duration / 2;
        auto it = std::find_if(truth.fixations.begin(), truth.fixations.end(),
                               [&](const TruthFixation& tf) { return tf.onset <= mid && mid <= tf.end; });
        if (it == truth.fixations.end()) continue;
        ++n;
        if (r.identified[i] && *r.identified[i] == it->line) ++hit;
    }
    return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

// Share of scripted sweeps matched by a detected sweep to the same line within 1 s.
inline double sweep_recall(const SimRun& r) {
    const auto& sweeps = r.sim.truth.sweeps;
    if (sweeps.empty()) return 1.0;
    std::size_t hit = 0;
    std::vector<bool> used(r.behaviors.size(), false);
    for (const auto& s : sweeps) {
        for (std::size_t i = 0; i < r.behaviors.size(); ++i) {
            const auto& e = r.behaviors[i];
            if (used[i] || e.kind != BehaviorKind::switch_return_sweep) continue;
            if (e.line_id == s.landed_line && std::llabs(e.at - s.at) <= kMicrosPerSecond) {
                used[i] = true;
                ++hit;
                break;
            }
        }
    }
    return static_cast<double>(hit) / static_cast<double>(sweeps.size());
}

}  // namespace gptest
