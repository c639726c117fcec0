#include "gazeprompt/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

const char* to_string(TargetKind kind) {
    switch (kind) {
        case TargetKind::dots14: return "dots14";
        case TargetKind::dots5: return "dots5";
        case TargetKind::lines5: return "lines5";
        case TargetKind::lines4: return "lines4";
    }
    return "dots5";
}

std::optional<TargetKind> target_kind_from_string(const std::string& s) {
    if (s == "dots14") return TargetKind::dots14;
    if (s == "dots5") return TargetKind::dots5;
    if (s == "lines5") return TargetKind::lines5;
    if (s == "lines4") return TargetKind::lines4;
    return std::nullopt;
}

TargetLayout make_target_layout(TargetKind kind, double target_radius_px) {
    TargetLayout layout;
    layout.kind = kind;
    layout.target_radius_px = target_radius_px;
    auto& t = layout.targets;
    switch (kind) {
        case TargetKind::dots14: {
            // rows of 3-4-4-3
            const double rows[] = {0.1, 0.1 + 0.8 / 3.0, 0.1 + 1.6 / 3.0, 0.9};
            const double three[] = {0.1, 0.5, 0.9};
            const double four[] = {0.1, 0.1 + 0.8 / 3.0, 0.1 + 1.6 / 3.0, 0.9};
            for (double x : three) t.push_back({x, rows[0]});
            for (double x : four) t.push_back({x, rows[1]});
            for (double x : four) t.push_back({x, rows[2]});
            for (double x : three) t.push_back({x, rows[3]});
            break;
        }
        case TargetKind::dots5:
            t = {{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.5}, {0.1, 0.9}, {0.9, 0.9}};
            break;
        case TargetKind::lines5:
            for (double y : {0.1, 0.3, 0.5, 0.7, 0.9}) t.push_back({kSweepStartFrac, y});
            break;
        case TargetKind::lines4:
            for (double y : {0.2, 0.4, 0.6, 0.8}) t.push_back({kSweepStartFrac, y});
            break;
    }
    return layout;
}

double SweepTrajectory::x_at(Micros t) const {
    if (duration <= 0) return end_x;
    const double u = std::clamp(static_cast<double>(t) / static_cast<double>(duration), 0.0, 1.0);
    const double s = u * u * (3.0 - 2.0 * u);
    return start_x + (end_x - start_x) * s;
}

std::vector<SweepTrajectory> sweep_trajectories(const TargetLayout& layout,
                                                const ScreenGeometry& geom, Micros duration) {
    std::vector<SweepTrajectory> out;
    if (!layout.is_sweep()) return out;
    for (const auto& p : layout.targets) {
        out.push_back({p.y_frac * geom.height_px, kSweepStartFrac * geom.width_px,
                       kSweepEndFrac * geom.width_px, duration});
    }
    return out;
}

DotValidationResult score_dot_validation(const std::vector<std::vector<GazeSample>>& per_target,
                                         const TargetLayout& layout, const ScreenGeometry& geom,
                                         std::size_t min_valid_samples) {
    if (per_target.size() != layout.targets.size())
        throw Error(ErrorCode::under_sampled, "expected samples for " +
                                                  std::to_string(layout.targets.size()) +
                                                  " targets, got " +
                                                  std::to_string(per_target.size()));
    DotValidationResult result;
    std::size_t total = 0, invalid = 0;
    for (std::size_t i = 0; i < per_target.size(); ++i) {
        double sx = 0.0, sy = 0.0;
        std::size_t n = 0;
        for (const auto& s : per_target[i]) {
            ++total;
            if (!s.valid) {
                ++invalid;
                continue;
            }
            sx += s.x;
            sy += s.y;
            ++n;
        }
        if (n < min_valid_samples)
            throw Error(ErrorCode::under_sampled,
                        "target " + std::to_string(i) + " has " + std::to_string(n) +
                            " valid samples, need " + std::to_string(min_valid_samples));
        const double tx = layout.targets[i].x_frac * geom.width_px;
        const double ty = layout.targets[i].y_frac * geom.height_px;
        result.per_target_deg.push_back(offset_to_degrees(sx / n - tx, sy / n - ty, geom));
    }
    result.mean_error_deg =
        std::accumulate(result.per_target_deg.begin(), result.per_target_deg.end(), 0.0) /
        static_cast<double>(result.per_target_deg.size());
    result.data_loss = total == 0 ? 0.0 : static_cast<double>(invalid) / static_cast<double>(total);
    return result;
}

Eye select_eye(const std::map<Eye, double>& mean_errors_deg) {
    // preference order on ties
    const Eye order[] = {Eye::average, Eye::right, Eye::left};
    std::optional<Eye> best;
    double best_err = 0.0;
    for (Eye e : order) {
        auto it = mean_errors_deg.find(e);
        if (it == mean_errors_deg.end()) continue;
        if (!best || it->second < best_err) {
            best = e;
            best_err = it->second;
        }
    }
    return best.value_or(Eye::average);
}

double DriftProfile::offset_at(double y) const {
    const auto& ys = calibrated_line_ys;
    const auto& off = per_line_offset;
    if (ys.empty()) return 0.0;
    if (y <= ys.front()) return off.front();
    if (y >= ys.back()) return off.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin());
    const std::size_t lo = hi - 1;
    const double u = (y - ys[lo]) / (ys[hi] - ys[lo]);
    return off[lo] + u * (off[hi] - off[lo]);
}

bool DriftProfile::is_zero() const {
    return std::all_of(per_line_offset.begin(), per_line_offset.end(),
                       [](double o) { return o == 0.0; });
}

void DriftProfile::validate() const {
    if (calibrated_line_ys.size() != per_line_offset.size() || calibrated_line_ys.size() < 2)
        throw Error(ErrorCode::invalid_config, "drift profile needs at least two calibrated lines");
    for (std::size_t i = 1; i < calibrated_line_ys.size(); ++i)
        if (!(calibrated_line_ys[i] > calibrated_line_ys[i - 1]))
            throw Error(ErrorCode::invalid_config,
                        "drift profile line positions must be strictly increasing");
}

std::vector<GazeSample> trimmed_sweep_samples(const SweepRecording& sweep, double trim_fraction) {
    std::vector<GazeSample> out;
    if (sweep.samples.empty()) return out;
    const Micros t0 = sweep.samples.front().t;
    const Micros t1 = sweep.samples.back().t;
    const double span = static_cast<double>(t1 - t0);
    const double lo = static_cast<double>(t0) + trim_fraction * span;
    const double hi = static_cast<double>(t1) - trim_fraction * span;
    for (const auto& s : sweep.samples) {
        const auto t = static_cast<double>(s.t);
        if (s.valid && std::isfinite(s.y) && t >= lo && t <= hi) out.push_back(s);
    }
    return out;
}

namespace {

double mean_vertical_offset(const std::vector<GazeSample>& samples, double line_y,
                            const DriftProfile* profile) {
    double sum = 0.0;
    for (const auto& s : samples) {
        const double y = profile ? correct_drift(s, *profile).y : s.y;
        sum += y - line_y;
    }
    return sum / static_cast<double>(samples.size());
}

}  // namespace

DriftProfile fit_drift_profile(const std::vector<SweepRecording>& sweeps, std::size_t min_samples) {
    if (sweeps.size() < 2)
        throw Error(ErrorCode::under_sampled, "drift fitting needs at least two calibrated lines");
    std::vector<const SweepRecording*> ordered;
    for (const auto& s : sweeps) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const SweepRecording* a, const SweepRecording* b) { return a->y_px < b->y_px; });

    DriftProfile profile;
    for (const SweepRecording* sweep : ordered) {
        const auto kept = trimmed_sweep_samples(*sweep);
        if (kept.size() < min_samples)
            throw Error(ErrorCode::under_sampled,
                        "calibration line at y=" + std::to_string(sweep->y_px) + " kept " +
                            std::to_string(kept.size()) + " samples, need " +
                            std::to_string(min_samples));
        profile.calibrated_line_ys.push_back(sweep->y_px);
        profile.per_line_offset.push_back(mean_vertical_offset(kept, sweep->y_px, nullptr));
    }
    profile.validate();
    return profile;
}

GazeSample correct_drift(const GazeSample& s, const DriftProfile& profile) {
    GazeSample out = s;
    if (s.valid) out.y = s.y - profile.offset_at(s.y);
    return out;
}

double score_line_validation(const std::vector<SweepRecording>& sweeps,
                             const DriftProfile* profile) {
    double total = 0.0;
    std::size_t lines = 0;
    for (const auto& sweep : sweeps) {
        const auto kept = trimmed_sweep_samples(sweep);
        if (kept.empty())
            throw Error(ErrorCode::under_sampled, "validation line at y=" +
                                                      std::to_string(sweep.y_px) +
                                                      " has no usable samples");
        total += std::abs(mean_vertical_offset(kept, sweep.y_px, profile));
        ++lines;
    }
    if (lines == 0) throw Error(ErrorCode::under_sampled, "no validation lines");
    return total / static_cast<double>(lines);
}

}  // namespace gazeprompt
