#include "gazeprompt/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_geometry: return "invalid_geometry";
        case ErrorCode::invalid_config: return "invalid_config";
        case ErrorCode::stream_order: return "stream_order";
        case ErrorCode::under_sampled: return "under_sampled";
        case ErrorCode::no_layout: return "no_layout";
        case ErrorCode::stale_fixation: return "stale_fixation";
        case ErrorCode::protocol: return "protocol";
        case ErrorCode::unsupported_format: return "unsupported_format";
        case ErrorCode::parse: return "parse";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

ScreenGeometry ScreenGeometry::from_diagonal(int width_px, int height_px, double diagonal_in,
                                             double viewing_distance_cm) {
    const double diag_cm = diagonal_in * 2.54;
    const double diag_px = std::hypot(static_cast<double>(width_px), static_cast<double>(height_px));
    ScreenGeometry g;
    g.width_px = width_px;
    g.height_px = height_px;
    g.physical_width_cm = diag_cm * width_px / diag_px;
    g.physical_height_cm = diag_cm * height_px / diag_px;
    g.viewing_distance_cm = viewing_distance_cm;
    return g;
}

ScreenGeometry ScreenGeometry::study_default() { return from_diagonal(1920, 1200, 24.0, 65.0); }

void ScreenGeometry::validate() const {
    if (width_px <= 0 || height_px <= 0)
        throw Error(ErrorCode::invalid_geometry, "screen resolution must be positive");
    if (!(physical_width_cm > 0.0) || !(physical_height_cm > 0.0))
        throw Error(ErrorCode::invalid_geometry, "physical screen size must be positive");
    if (!(viewing_distance_cm > 0.0))
        throw Error(ErrorCode::invalid_geometry, "viewing distance must be positive");
    const double px_aspect = static_cast<double>(width_px) / height_px;
    const double cm_aspect = physical_width_cm / physical_height_cm;
    if (std::abs(px_aspect - cm_aspect) > 0.01 * px_aspect)
        throw Error(ErrorCode::invalid_geometry, "pixel and physical aspect ratios disagree");
}

char eye_code(Eye eye) {
    switch (eye) {
        case Eye::left: return 'L';
        case Eye::right: return 'R';
        case Eye::average: return 'A';
    }
    return 'A';
}

std::optional<Eye> eye_from_code(char c) {
    switch (c) {
        case 'L': return Eye::left;
        case 'R': return Eye::right;
        case 'A': return Eye::average;
        default: return std::nullopt;
    }
}

const char* to_string(Eye eye) {
    switch (eye) {
        case Eye::left: return "left";
        case Eye::right: return "right";
        case Eye::average: return "average";
    }
    return "average";
}

const char* to_string(Background bg) { return bg == Background::dark ? "dark" : "light"; }

double PageLayout::text_left() const {
    double left = std::numeric_limits<double>::infinity();
    for (const auto& l : lines) left = std::min(left, l.left);
    return lines.empty() ? 0.0 : left;
}

const LineBox* PageLayout::find_line(LineId id) const {
    // line ids are contiguous from 0 in a valid layout
    if (id >= 0 && static_cast<std::size_t>(id) < lines.size() && lines[id].line_id == id)
        return &lines[id];
    for (const auto& l : lines)
        if (l.line_id == id) return &l;
    return nullptr;
}

const WordBox* PageLayout::find_word(WordId id) const {
    for (const auto& w : words)
        if (w.word_id == id) return &w;
    return nullptr;
}

std::vector<const WordBox*> PageLayout::words_on_line(LineId id) const {
    std::vector<const WordBox*> out;
    for (const auto& w : words)
        if (w.line_id == id) out.push_back(&w);
    std::stable_sort(out.begin(), out.end(),
                     [](const WordBox* a, const WordBox* b) { return a->left < b->left; });
    return out;
}

namespace {

std::string describe(const char* what, std::initializer_list<int> ids) {
    std::ostringstream os;
    os << what;
    const char* sep = " (";
    for (int id : ids) {
        os << sep << id;
        sep = ", ";
    }
    if (ids.size() != 0) os << ")";
    return os.str();
}

}  // namespace

std::vector<LayoutViolation> validate_layout(const PageLayout& layout) {
    std::vector<LayoutViolation> out;
    auto add = [&](ViolationKind kind, std::initializer_list<int> ids, const char* what) {
        out.push_back({kind, std::vector<int>(ids), describe(what, ids)});
    };

    if (layout.lines.empty()) {
        add(ViolationKind::empty_layout, {}, "layout has no lines");
        return out;
    }

    for (const auto& l : layout.lines) {
        if (!(l.bottom > l.top) || !(l.right > l.left))
            add(ViolationKind::degenerate_line, {l.line_id}, "line box has no extent");
    }

    std::vector<int> ids;
    for (const auto& l : layout.lines) ids.push_back(l.line_id);
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != static_cast<int>(i)) {
            add(ViolationKind::non_contiguous_line_ids, {sorted[i]},
                "line ids are not contiguous from 0");
            break;
        }
    }

    for (std::size_t i = 0; i < layout.lines.size(); ++i) {
        for (std::size_t j = i + 1; j < layout.lines.size(); ++j) {
            const auto& a = layout.lines[i];
            const auto& b = layout.lines[j];
            if (a.top < b.bottom && b.top < a.bottom)
                add(ViolationKind::overlapping_lines, {a.line_id, b.line_id},
                    "line boxes overlap vertically");
        }
    }

    double min_left = std::numeric_limits<double>::infinity();
    double max_right = -std::numeric_limits<double>::infinity();
    for (const auto& l : layout.lines) {
        min_left = std::min(min_left, l.left);
        max_right = std::max(max_right, l.right);
    }
    if (std::abs((max_right - min_left) - layout.text_width) > 0.5)
        add(ViolationKind::text_width_mismatch, {}, "text_width differs from line extent");

    for (const auto& l : layout.lines) {
        if (std::abs(l.height() - layout.line_height) > 0.5)
            add(ViolationKind::line_height_mismatch, {l.line_id},
                "line box height differs from line_height");
    }

    std::set<int> word_ids;
    std::unordered_map<int, double> last_left;
    for (const auto& w : layout.words) {
        if (!word_ids.insert(w.word_id).second)
            add(ViolationKind::duplicate_word_id, {w.word_id}, "duplicate word id");
        if (!(w.right > w.left))
            add(ViolationKind::degenerate_word, {w.word_id}, "word box has no extent");
        const LineBox* line = layout.find_line(w.line_id);
        if (line == nullptr) {
            add(ViolationKind::dangling_word_line, {w.word_id, w.line_id},
                "word references a missing line");
            continue;
        }
        if (w.left < line->left - 0.5 || w.right > line->right + 0.5)
            add(ViolationKind::word_outside_line, {w.word_id, w.line_id},
                "word box extends past its line");
        auto it = last_left.find(w.line_id);
        if (it != last_left.end() && w.left < it->second)
            add(ViolationKind::word_order, {w.word_id, w.line_id},
                "words on a line are not ordered left to right");
        last_left[w.line_id] = w.left;
    }
    return out;
}

void refresh_layout_metrics(PageLayout& layout) {
    if (layout.lines.empty()) {
        layout.text_width = 0.0;
        layout.line_height = 0.0;
        return;
    }
    double min_left = std::numeric_limits<double>::infinity();
    double max_right = -std::numeric_limits<double>::infinity();
    for (const auto& l : layout.lines) {
        min_left = std::min(min_left, l.left);
        max_right = std::max(max_right, l.right);
    }
    layout.text_width = max_right - min_left;
    layout.line_height = layout.lines.front().height();
}

PageLayout translate_layout(const PageLayout& layout, double dy, int new_version) {
    PageLayout out = layout;
    out.layout_version = new_version;
    for (auto& l : out.lines) {
        l.top += dy;
        l.bottom += dy;
    }
    return out;
}

namespace {

double cm_per_px(Axis axis, const ScreenGeometry& geom) {
    if (!(geom.viewing_distance_cm > 0.0))
        throw Error(ErrorCode::invalid_geometry, "viewing distance must be positive");
    return axis == Axis::horizontal ? geom.cm_per_px_x() : geom.cm_per_px_y();
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

double px_to_degrees(double offset_px, Axis axis, const ScreenGeometry& geom) {
    const double cm = offset_px * cm_per_px(axis, geom);
    return std::atan(cm / geom.viewing_distance_cm) * kRadToDeg;
}

double degrees_to_px(double degrees, Axis axis, const ScreenGeometry& geom) {
    const double scale = cm_per_px(axis, geom);
    return std::tan(degrees / kRadToDeg) * geom.viewing_distance_cm / scale;
}

double offset_to_degrees(double dx_px, double dy_px, const ScreenGeometry& geom) {
    if (!(geom.viewing_distance_cm > 0.0))
        throw Error(ErrorCode::invalid_geometry, "viewing distance must be positive");
    const double dist_cm = std::hypot(dx_px * geom.cm_per_px_x(), dy_px * geom.cm_per_px_y());
    return std::atan(dist_cm / geom.viewing_distance_cm) * kRadToDeg;
}

Micros EngineConfig::nominal_period_us() const {
    return static_cast<Micros>(std::llround(1e6 / sample_rate_hz));
}

void EngineConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_config, what); };
    if (!(t_ls0_px > 0.0)) fail("t_ls0_px must be positive");
    if (!(t_ls1_fraction > 0.0) || t_ls1_fraction > 1.0) fail("t_ls1_fraction must be in (0, 1]");
    if (t_dw0_us <= 0 || t_dw0_us % kDw0Step != 0)
        fail("t_dw0_us must be a positive multiple of 50000");
    if (t_dw1 <= 0) fail("t_dw1 must be positive");
    if (t_dw2_us <= 0 || t_dw2_us % kDw2Step != 0)
        fail("t_dw2_us must be a positive multiple of 250000");
    if (!(fixation_dispersion_px > 0.0)) fail("fixation_dispersion_px must be positive");
    if (min_fixation_duration_us <= 0) fail("min_fixation_duration_us must be positive");
    if (jump_stability_count <= 0) fail("jump_stability_count must be positive");
    if (vote_window < 1) fail("vote_window must be at least 1");
    if (scroll_pause_gap_us <= 0) fail("scroll_pause_gap_us must be positive");
    if (blink_merge_us <= 0) fail("blink_merge_us must be positive");
    if (median_window < 1 || median_window % 2 == 0) fail("median_window must be odd and positive");
    if (!(max_velocity_deg_per_s > 0.0)) fail("max_velocity_deg_per_s must be positive");
    if (!(sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
}

}  // namespace gazeprompt
