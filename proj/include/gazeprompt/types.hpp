#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gazeprompt {

// Microseconds on the tracker clock.
using Micros = std::int64_t;
using LineId = int;
using WordId = int;

inline constexpr Micros kMicrosPerSecond = 1'000'000;

struct ScreenGeometry {
    int width_px = 1920;
    int height_px = 1200;
    double physical_width_cm = 0.0;
    double physical_height_cm = 0.0;
    double viewing_distance_cm = 65.0;

    // Physical size from a diagonal in inches, assuming square pixels.
    static ScreenGeometry from_diagonal(int width_px, int height_px, double diagonal_in,
                                        double viewing_distance_cm);

    // 24" 1920x1200 panel viewed at 65 cm.
    static ScreenGeometry study_default();

    double cm_per_px_x() const { return physical_width_cm / width_px; }
    double cm_per_px_y() const { return physical_height_cm / height_px; }

    // Throws Error(invalid_geometry) on non-positive fields or mismatched aspect ratios.
    void validate() const;
};

enum class Eye { left, right, average };

char eye_code(Eye eye);
std::optional<Eye> eye_from_code(char c);
const char* to_string(Eye eye);

struct GazeSample {
    Micros t = 0;
    double x = 0.0;
    double y = 0.0;
    bool valid = true;
    Eye eye = Eye::average;
};

struct Fixation {
    double cx = 0.0;
    double cy = 0.0;
    Micros onset = 0;
    Micros duration = 0;
    int sample_count = 0;
    // Layout version the centroid coordinates refer to.
    int layout_version = 0;

    Micros offset() const { return onset + duration; }
};

struct LineBox {
    LineId line_id = 0;
    double top = 0.0;
    double bottom = 0.0;
    double left = 0.0;
    double right = 0.0;

    double center() const { return 0.5 * (top + bottom); }
    double height() const { return bottom - top; }
};

struct WordBox {
    WordId word_id = 0;
    LineId line_id = 0;
    double left = 0.0;
    double right = 0.0;
    std::string text;
    bool function_word = false;

    double center() const { return 0.5 * (left + right); }
    double width() const { return right - left; }
};

enum class Background { light, dark };

const char* to_string(Background bg);

struct PageLayout {
    int layout_version = 0;
    std::vector<LineBox> lines;
    std::vector<WordBox> words;
    double text_width = 0.0;
    double line_height = 0.0;
    Background background = Background::light;

    double text_left() const;
    const LineBox* find_line(LineId id) const;
    const WordBox* find_word(WordId id) const;
    // Words of one line, left to right.
    std::vector<const WordBox*> words_on_line(LineId id) const;
};

// One scroll input. dy is the on-screen displacement of the page content (+down), so
// scrolling further into a passage gives negative dy.
struct ScrollEvent {
    Micros t = 0;
    double dy = 0.0;
};

// old id -> new id across a layout change. Ids missing from the map did not survive.
using IdMap = std::unordered_map<int, int>;

enum class ViolationKind {
    empty_layout,
    degenerate_line,
    non_contiguous_line_ids,
    overlapping_lines,
    text_width_mismatch,
    line_height_mismatch,
    degenerate_word,
    dangling_word_line,
    duplicate_word_id,
    word_outside_line,
    word_order,
};

struct LayoutViolation {
    ViolationKind kind;
    std::vector<int> ids;  // line or word ids involved
    std::string message;
};

std::vector<LayoutViolation> validate_layout(const PageLayout& layout);

// Recomputes text_width and line_height from the boxes.
void refresh_layout_metrics(PageLayout& layout);

// Same text shifted vertically by dy (screen px, +down), stamped with a new version.
PageLayout translate_layout(const PageLayout& layout, double dy, int new_version);

enum class Axis { horizontal, vertical };

double px_to_degrees(double offset_px, Axis axis, const ScreenGeometry& geom);
double degrees_to_px(double degrees, Axis axis, const ScreenGeometry& geom);

// Angular size of an arbitrary on-screen displacement, using the per-axis pixel pitch.
double offset_to_degrees(double dx_px, double dy_px, const ScreenGeometry& geom);

enum class LineSwitchHeightMode { line_box_height };

struct EngineConfig {
    double t_ls0_px = 500.0;
    double t_ls1_fraction = 1.0 / 3.0;
    LineSwitchHeightMode t_ls2_mode = LineSwitchHeightMode::line_box_height;
    Micros t_dw0_us = 500'000;
    int t_dw1 = 4;
    Micros t_dw2_us = 1'500'000;
    double fixation_dispersion_px = 60.0;
    Micros min_fixation_duration_us = 100'000;
    int jump_stability_count = 3;
    int vote_window = 3;
    Micros scroll_pause_gap_us = 100'000;
    bool stopword_suppression = false;

    // Signal conditioning.
    Micros blink_merge_us = 75'000;
    int median_window = 3;
    double max_velocity_deg_per_s = 1000.0;
    double sample_rate_hz = 120.0;

    static constexpr Micros kDw0Step = 50'000;
    static constexpr Micros kDw2Step = 250'000;

    Micros nominal_period_us() const;

    // Throws Error(invalid_config).
    void validate() const;
};

}  // namespace gazeprompt
