#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gazeprompt/types.hpp"

namespace gazeprompt {

enum class TargetKind { dots14, dots5, lines5, lines4 };

const char* to_string(TargetKind kind);
std::optional<TargetKind> target_kind_from_string(const std::string& s);

struct TargetPoint {
    double x_frac;
    double y_frac;
};

struct TargetLayout {
    TargetKind kind = TargetKind::dots5;
    std::vector<TargetPoint> targets;
    double target_radius_px = 24.0;

    bool is_sweep() const { return kind == TargetKind::lines5 || kind == TargetKind::lines4; }
};

TargetLayout make_target_layout(TargetKind kind, double target_radius_px = 24.0);

// Horizontal pursuit target with smoothstep ease-in/ease-out.
struct SweepTrajectory {
    double y_px = 0.0;
    double start_x = 0.0;
    double end_x = 0.0;
    Micros duration = 4 * kMicrosPerSecond;

    double x_at(Micros t) const;
};

inline constexpr double kSweepStartFrac = 0.05;
inline constexpr double kSweepEndFrac = 0.95;

std::vector<SweepTrajectory> sweep_trajectories(const TargetLayout& layout,
                                                const ScreenGeometry& geom,
                                                Micros duration = 4 * kMicrosPerSecond);

struct DotValidationResult {
    double mean_error_deg = 0.0;
    std::vector<double> per_target_deg;
    double data_loss = 0.0;
};

// Throws Error(under_sampled) naming the first target with too few valid samples.
DotValidationResult score_dot_validation(const std::vector<std::vector<GazeSample>>& per_target,
                                         const TargetLayout& layout, const ScreenGeometry& geom,
                                         std::size_t min_valid_samples = 30);

// Missing entries are streams that were not validated. Ties go to average, then right.
Eye select_eye(const std::map<Eye, double>& mean_errors_deg);

struct SweepRecording {
    double y_px = 0.0;
    std::vector<GazeSample> samples;
};

struct DriftProfile {
    std::vector<double> calibrated_line_ys;
    std::vector<double> per_line_offset;

    // Piecewise-linear between calibrated lines, clamped to the end offsets outside them.
    double offset_at(double y) const;
    bool is_zero() const;
    void validate() const;
};

inline constexpr double kSweepTrimFraction = 0.10;
inline constexpr std::size_t kMinDriftSamples = 50;

// Valid samples of a sweep with the first and last 10% of its time span removed.
std::vector<GazeSample> trimmed_sweep_samples(const SweepRecording& sweep,
                                              double trim_fraction = kSweepTrimFraction);

// Throws Error(under_sampled) when a line keeps fewer than min_samples after trimming.
DriftProfile fit_drift_profile(const std::vector<SweepRecording>& sweeps,
                               std::size_t min_samples = kMinDriftSamples);

GazeSample correct_drift(const GazeSample& s, const DriftProfile& profile);

// Mean over lines of |mean signed vertical offset| for validation sweeps, optionally
// after applying a drift profile.
double score_line_validation(const std::vector<SweepRecording>& sweeps,
                             const DriftProfile* profile = nullptr);

inline bool decide_apply_correction(double raw_error_px, double corrected_error_px) {
    return corrected_error_px < raw_error_px;
}

}  // namespace gazeprompt
