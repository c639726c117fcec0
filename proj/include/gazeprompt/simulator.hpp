#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gazeprompt/behavior.hpp"
#include "gazeprompt/calibration.hpp"
#include "gazeprompt/types.hpp"

namespace gazeprompt {

// Synthetic reader. Durations are in milliseconds, distances in screen pixels.
struct ReaderProfile {
    double fixation_mean_ms = 250.0;
    double fixation_sd_ms = 80.0;
    double fixation_min_ms = 120.0;
    double fixation_max_ms = 450.0;
    // Probability that a forward saccade skips one word (saccades span 1-2 words).
    double skip_probability = 0.3;
    // Never land closer than this to the previous fixation.
    double min_saccade_px = 80.0;

    // Per eligible word: hesitate long enough to trigger one difficult-word rule.
    double hesitation_probability = 0.0;
    // Per return sweep: land 1..max_deviation_lines below the intended line, then correct.
    double sweep_undershoot_lines = 0.0;
    int max_deviation_lines = 1;
    // Per line: jump back to re-read part of the previous line, then return.
    double revisit_probability = 0.0;
    // Scroll the content up by one line pitch every N lines (0 disables).
    int scroll_every_lines = 0;

    double noise_sd_px = 0.0;
    // Vertical drift knots (screen y, offset +down), linear between, clamped outside.
    std::vector<std::pair<double, double>> drift;
    double data_loss_rate = 0.0;

    double sample_rate_hz = 120.0;
    int saccade_gap_samples = 3;
    int sweep_gap_samples = 10;
    int jump_gap_samples = 6;
    std::uint64_t seed = 1;

    double drift_at(double y) const;
    void validate() const;
};

struct TruthFixation {
    LineId line = 0;
    std::optional<WordId> word;
    double x = 0.0;  // screen position at onset, before noise and drift
    double y = 0.0;
    Micros onset = 0;
    Micros end = 0;
    int layout_version = 0;
};

struct TruthSweep {
    LineId from_line = 0;
    LineId target_line = 0;
    LineId landed_line = 0;
    Micros at = 0;  // onset of the landing fixation
};

struct TruthDeviation {
    LineId wrong_line = 0;
    LineId target_line = 0;
    Micros at = 0;
    int magnitude() const { return wrong_line > target_line ? wrong_line - target_line : target_line - wrong_line; }
};

struct TruthJump {
    LineId from_line = 0;
    LineId line = 0;
    Micros at = 0;  // onset of the first fixation on the new line
};

struct TruthDifficultWord {
    WordId word = 0;
    DwTrigger trigger = DwTrigger::first_fixation;
    Micros at = 0;  // onset of the first fixation of the pass
};

struct TruthScroll {
    ScrollEvent scroll;
    int layout_version = 0;  // version in effect after the scroll
};

struct GroundTruth {
    std::vector<int> sample_fixation;  // per sample: index into fixations, -1 outside fixations
    std::vector<TruthFixation> fixations;
    std::vector<TruthSweep> sweeps;
    std::vector<TruthDeviation> deviations;
    std::vector<TruthJump> jumps;
    std::vector<TruthDifficultWord> difficult_words;
    std::vector<TruthScroll> scrolls;
};

struct Simulation {
    std::vector<GazeSample> samples;
    GroundTruth truth;
};

Simulation simulate(const PageLayout& layout, const ReaderProfile& profile);

// Pursuit of lines5 or lines4 sweep targets, one recording per line.
std::vector<SweepRecording> simulate_sweep_session(TargetKind kind, const ReaderProfile& profile,
                                                   const ScreenGeometry& geom,
                                                   Micros sweep_duration = 4 * kMicrosPerSecond);

// Layout after applying the recorded scrolls up to and including `version`.
PageLayout layout_at_version(const PageLayout& base, const GroundTruth& truth, int version);

}  // namespace gazeprompt
