#include "gazeprompt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

double ReaderProfile::drift_at(double y) const {
    if (drift.empty()) return 0.0;
    if (y <= drift.front().first) return drift.front().second;
    if (y >= drift.back().first) return drift.back().second;
    for (std::size_t i = 1; i < drift.size(); ++i) {
        if (y <= drift[i].first) {
            const auto [y0, o0] = drift[i - 1];
            const auto [y1, o1] = drift[i];
            return o0 + (o1 - o0) * (y - y0) / (y1 - y0);
        }
    }
    return drift.back().second;
}

void ReaderProfile::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(ErrorCode::invalid_config, std::string(name) + " must be in [0, 1]");
    };
    prob(skip_probability, "skip_probability");
    prob(hesitation_probability, "hesitation_probability");
    prob(sweep_undershoot_lines, "sweep_undershoot_lines");
    prob(revisit_probability, "revisit_probability");
    prob(data_loss_rate, "data_loss_rate");
    if (!(fixation_min_ms > 0.0) || fixation_max_ms < fixation_min_ms)
        throw Error(ErrorCode::invalid_config, "fixation duration bounds are inconsistent");
    if (noise_sd_px < 0.0) throw Error(ErrorCode::invalid_config, "noise_sd_px must be >= 0");
    if (max_deviation_lines < 1) throw Error(ErrorCode::invalid_config, "max_deviation_lines must be >= 1");
    if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::invalid_config, "sample_rate_hz must be positive");
    for (std::size_t i = 1; i < drift.size(); ++i)
        if (!(drift[i].first > drift[i - 1].first))
            throw Error(ErrorCode::invalid_config, "drift knots must have increasing y");
}

namespace {

// Hard-word hesitations sized so exactly one difficult-word rule fires under the
// default thresholds.
constexpr double kHesitationMinWidthPx = 150.0;
constexpr int kStabilizeFixations = 4;

class ReadingScript {
public:
    ReadingScript(const PageLayout& layout, const ReaderProfile& profile)
        : layout_(layout), p_(profile), rng_(profile.seed), noise_(0.0, 1.0) {
        for (const auto& line : layout.lines) {
            (void)line;
            words_.emplace_back();
        }
        for (const auto& line : layout.lines) words_[line.line_id] = layout.words_on_line(line.line_id);
        pitch_ = layout.lines.size() > 1 ? layout.lines[1].top - layout.lines[0].top
                                         : layout.line_height * 1.5;
        version_ = layout.layout_version;
    }

    Simulation run();

private:
    enum class Hesitation { none, dw0, dw1, dw2 };

    Micros time_of(long slot) const {
        return static_cast<Micros>(std::llround(static_cast<double>(slot) * 1e6 / p_.sample_rate_hz));
    }
    Micros now() const { return time_of(slot_); }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool chance(double p) { return p > 0.0 && std::bernoulli_distribution(p)(rng_); }
    double normal_duration() {
        const double d = p_.fixation_mean_ms + p_.fixation_sd_ms * noise_(rng_);
        return std::clamp(d, p_.fixation_min_ms, p_.fixation_max_ms);
    }

    const LineBox& line(LineId id) const { return layout_.lines[static_cast<std::size_t>(id)]; }
    double center_x(LineId l, int idx) const { return words_[l][idx]->center(); }

    std::vector<int> plan_line(LineId l, int start);

    void gap(int samples) { slot_ += samples; }
    void fixate(LineId l, std::optional<WordId> word, double x, double dur_ms, bool scroll_mid = false);
    void read_word(LineId l, int idx, Hesitation h);

    const PageLayout& layout_;
    const ReaderProfile& p_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> noise_;
    std::vector<std::vector<const WordBox*>> words_;
    double pitch_ = 0.0;

    long slot_ = 0;
    double content_dy_ = 0.0;
    int version_ = 0;
    Simulation out_;
};

std::vector<int> ReadingScript::plan_line(LineId l, int start) {
    const auto& ws = words_[l];
    const int last = static_cast<int>(ws.size()) - 1;
    std::vector<int> plan;
    if (start > last) return plan;
    int idx = start;
    plan.push_back(idx);
    while (idx < last) {
        int next = std::min(last, idx + (chance(p_.skip_probability) ? 2 : 1));
        while (next <= last && center_x(l, next) - center_x(l, idx) < p_.min_saccade_px) ++next;
        if (next > last) break;
        plan.push_back(next);
        idx = next;
    }
    return plan;
}

void ReadingScript::fixate(LineId l, std::optional<WordId> word, double x, double dur_ms,
                           bool scroll_mid) {
    const double period_ms = 1000.0 / p_.sample_rate_hz;
    const int n = std::max(2, static_cast<int>(std::lround(dur_ms / period_ms)));
    const int index = static_cast<int>(out_.truth.fixations.size());

    TruthFixation tf;
    tf.line = l;
    tf.word = word;
    tf.x = x;
    tf.y = line(l).center() + content_dy_;
    tf.onset = now();
    tf.layout_version = version_;

    std::bernoulli_distribution lost(p_.data_loss_rate);
    for (int i = 0; i < n; ++i) {
        if (scroll_mid && i == n / 2) {
            content_dy_ -= pitch_;
            ++version_;
            out_.truth.scrolls.push_back({{now() - 1, -pitch_}, version_});
        }
        const double y = line(l).center() + content_dy_;
        GazeSample s;
        s.t = now();
        s.eye = Eye::average;
        s.x = x + p_.noise_sd_px * noise_(rng_);
        s.y = y + p_.drift_at(y) + p_.noise_sd_px * noise_(rng_);
        s.valid = !(p_.data_loss_rate > 0.0 && lost(rng_));
        if (!s.valid) s.x = s.y = 0.0;
        out_.samples.push_back(s);
        out_.truth.sample_fixation.push_back(index);
        ++slot_;
    }
    tf.end = time_of(slot_ - 1);
    out_.truth.fixations.push_back(tf);
}

void ReadingScript::read_word(LineId l, int idx, Hesitation h) {
    const WordBox& w = *words_[l][idx];
    const double right_q = w.right - w.width() / 4.0;
    const double left_q = w.left + w.width() / 4.0;
    switch (h) {
        case Hesitation::none:
            fixate(l, w.word_id, w.center(), normal_duration());
            return;
        case Hesitation::dw0:
            out_.truth.difficult_words.push_back({w.word_id, DwTrigger::first_fixation, now()});
            fixate(l, w.word_id, w.center(), uniform(650.0, 900.0));
            return;
        case Hesitation::dw1:
        case Hesitation::dw2: {
            const bool refix = h == Hesitation::dw1;
            out_.truth.difficult_words.push_back(
                {w.word_id, refix ? DwTrigger::refixations : DwTrigger::total_duration, now()});
            const int count = refix ? 6 : 4;
            for (int i = 0; i < count; ++i) {
                if (i) gap(p_.saccade_gap_samples);
                // ends on the left quarter so the next forward saccade clears the dispersion window
                fixate(l, w.word_id, i % 2 == 0 ? right_q : left_q,
                       refix ? uniform(150.0, 190.0) : uniform(420.0, 480.0));
            }
            return;
        }
    }
}

Simulation ReadingScript::run() {
    const int last_line = static_cast<int>(layout_.lines.size()) - 1;
    const double text_left = layout_.text_left();
    const double left_third = text_left + layout_.text_width / 3.0;

    int settled_from = 1;  // plan indices below this follow a jump and stay plain
    std::optional<std::vector<int>> next_plan;
    for (LineId k = 0; k <= last_line; ++k) {
        const std::vector<int> plan = next_plan ? *next_plan : plan_line(k, 0);
        next_plan.reset();
        if (plan.empty()) continue;

        // scroll on the first settled fixation when the previous line stays on screen
        int scroll_index = -1;
        if (p_.scroll_every_lines > 0 && k > 0 && k % p_.scroll_every_lines == 0 &&
            settled_from < static_cast<int>(plan.size()) &&
            line(k - 1).top + content_dy_ - pitch_ >= 0.0)
            scroll_index = settled_from;

        // re-read part of the previous line after plan[revisit_after], return to plan[+1]
        int revisit_after = -1;
        std::vector<int> revisit_plan;
        if (scroll_index < 0 && k > 0 && settled_from == 1 && chance(p_.revisit_probability)) {
            std::vector<int> candidates;
            for (int j = 1; j + kStabilizeFixations < static_cast<int>(plan.size()); ++j)
                if (center_x(k, plan[j + 1]) > left_third + 1.0) candidates.push_back(j);
            std::vector<int> starts;
            for (int i = 0; i < static_cast<int>(words_[k - 1].size()); ++i) {
                auto probe = plan_line(k - 1, i);
                if (static_cast<int>(probe.size()) >= kStabilizeFixations) starts.push_back(i);
            }
            if (!candidates.empty() && !starts.empty()) {
                revisit_after = candidates[std::uniform_int_distribution<std::size_t>(
                    0, candidates.size() - 1)(rng_)];
                const int start = starts[std::uniform_int_distribution<std::size_t>(
                    0, starts.size() - 1)(rng_)];
                revisit_plan = plan_line(k - 1, start);
                revisit_plan.resize(kStabilizeFixations);
            }
        }

        for (int pi = 0; pi < static_cast<int>(plan.size()); ++pi) {
            if (pi > 0) {
                const bool after_return = revisit_after >= 0 && pi == revisit_after + 1;
                gap(after_return ? p_.jump_gap_samples : p_.saccade_gap_samples);
                if (after_return) out_.truth.jumps.push_back({k - 1, k, now()});
            }
            const int idx = plan[pi];
            const WordBox& w = *words_[k][idx];

            const bool unsettled = pi < settled_from ||
                                   (revisit_after >= 0 && pi > revisit_after &&
                                    pi <= revisit_after + kStabilizeFixations);
            Hesitation h = Hesitation::none;
            if (!unsettled && pi != scroll_index && w.width() >= kHesitationMinWidthPx &&
                !w.function_word && chance(p_.hesitation_probability)) {
                const int kind = std::uniform_int_distribution<int>(0, 2)(rng_);
                h = kind == 0 ? Hesitation::dw0 : kind == 1 ? Hesitation::dw1 : Hesitation::dw2;
            }
            if (pi == scroll_index)
                fixate(k, w.word_id, w.center(), normal_duration(), true);
            else
                read_word(k, idx, h);

            if (pi == revisit_after) {
                gap(p_.jump_gap_samples);
                out_.truth.jumps.push_back({k, k - 1, now()});
                for (std::size_t r = 0; r < revisit_plan.size(); ++r) {
                    if (r) gap(p_.saccade_gap_samples);
                    read_word(k - 1, revisit_plan[r], Hesitation::none);
                }
            }
        }

        settled_from = 1;
        if (k == last_line) break;

        // return sweep to the next line, possibly overshooting it
        const LineId target = k + 1;
        gap(p_.sweep_gap_samples);
        const int max_dev = std::min(p_.max_deviation_lines, last_line - target);
        if (max_dev >= 1 && chance(p_.sweep_undershoot_lines)) {
            // the corrected line needs enough fixations for the jump to stabilize
            auto target_plan = plan_line(target, 0);
            if (target_plan.size() >= static_cast<std::size_t>(kStabilizeFixations)) {
                next_plan = std::move(target_plan);
                const int m = std::uniform_int_distribution<int>(1, max_dev)(rng_);
                const LineId wrong = target + m;
                out_.truth.sweeps.push_back({k, target, wrong, now()});
                out_.truth.deviations.push_back({wrong, target, now()});
                const auto wrong_plan = plan_line(wrong, 0);
                const std::size_t stay = std::min<std::size_t>(wrong_plan.size(), chance(0.5) ? 2 : 1);
                for (std::size_t r = 0; r < stay; ++r) {
                    if (r) gap(p_.saccade_gap_samples);
                    read_word(wrong, wrong_plan[r], Hesitation::none);
                }
                gap(p_.jump_gap_samples);
                out_.truth.jumps.push_back({wrong, target, now()});
                settled_from = kStabilizeFixations;
                continue;
            }
        }
        out_.truth.sweeps.push_back({k, target, target, now()});
    }
    return std::move(out_);
}

}  // namespace

Simulation simulate(const PageLayout& layout, const ReaderProfile& profile) {
    profile.validate();
    if (!validate_layout(layout).empty())
        throw Error(ErrorCode::no_layout, "simulation needs a valid layout");
    ReadingScript script(layout, profile);
    return script.run();
}

std::vector<SweepRecording> simulate_sweep_session(TargetKind kind, const ReaderProfile& profile,
                                                   const ScreenGeometry& geom, Micros sweep_duration) {
    profile.validate();
    const TargetLayout targets = make_target_layout(kind);
    if (!targets.is_sweep()) throw Error(ErrorCode::invalid_config, "sweep session needs lines5 or lines4");

    std::mt19937_64 rng(profile.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::bernoulli_distribution lost(profile.data_loss_rate);
    const double period_us = 1e6 / profile.sample_rate_hz;
    auto time_of = [&](long slot) { return static_cast<Micros>(std::llround(slot * period_us)); };

    std::vector<SweepRecording> out;
    long slot = 0;
    for (const auto& traj : sweep_trajectories(targets, geom, sweep_duration)) {
        SweepRecording rec;
        rec.y_px = traj.y_px;
        const Micros t0 = time_of(slot);
        const long n = static_cast<long>(std::floor(static_cast<double>(sweep_duration) / period_us)) + 1;
        for (long i = 0; i < n; ++i, ++slot) {
            GazeSample s;
            s.t = time_of(slot);
            s.eye = Eye::average;
            s.x = traj.x_at(s.t - t0) + profile.noise_sd_px * noise(rng);
            s.y = traj.y_px + profile.drift_at(traj.y_px) + profile.noise_sd_px * noise(rng);
            s.valid = !(profile.data_loss_rate > 0.0 && lost(rng));
            if (!s.valid) s.x = s.y = 0.0;
            rec.samples.push_back(s);
        }
        out.push_back(std::move(rec));
        slot += static_cast<long>(profile.sample_rate_hz);  // one second between lines
    }
    return out;
}

PageLayout layout_at_version(const PageLayout& base, const GroundTruth& truth, int version) {
    double dy = 0.0;
    for (const auto& s : truth.scrolls)
        if (s.layout_version <= version) dy += s.scroll.dy;
    return translate_layout(base, dy, version);
}

}  // namespace gazeprompt
