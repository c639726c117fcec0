#include "gazeprompt/json_io.hpp"

#include <algorithm>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

double as_number(const Json& v, const std::string& key, ErrorCode code) {
    if (!v.is_number()) fail(code, "field '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t as_int(const Json& v, const std::string& key, ErrorCode code) {
    if (!v.is_number_integer()) {
        // integral values written as floats are accepted
        if (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<std::int64_t>(v.get<double>())))
            return static_cast<std::int64_t>(v.get<double>());
        fail(code, "field '" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

bool as_bool(const Json& v, const std::string& key, ErrorCode code) {
    if (!v.is_boolean()) fail(code, "field '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& key, ErrorCode code) {
    if (!v.is_string()) fail(code, "field '" + key + "' must be a string");
    return v.get<std::string>();
}

const Json& require(const Json& j, const std::string& key, ErrorCode code) {
    if (!j.is_object()) fail(code, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(code, "missing field '" + key + "'");
    return *it;
}

const Json& require_array(const Json& j, const std::string& key, ErrorCode code) {
    const Json& v = require(j, key, code);
    if (!v.is_array()) fail(code, "field '" + key + "' must be an array");
    return v;
}

template <class F>
void each_field(const Json& j, const char* what, ErrorCode code, F&& handle) {
    if (!j.is_object()) fail(code, std::string(what) + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!handle(key, value)) fail(code, "unknown field '" + key + "' in " + what);
}

Background background_from(const std::string& s, ErrorCode code) {
    if (s == "light") return Background::light;
    if (s == "dark") return Background::dark;
    fail(code, "background must be 'light' or 'dark'");
}

std::optional<int> opt_int(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return static_cast<int>(as_int(*it, key, ErrorCode::parse));
}

BehaviorKind behavior_kind_from(const std::string& s) {
    for (auto k : {BehaviorKind::following, BehaviorKind::switch_return_sweep, BehaviorKind::jump,
                   BehaviorKind::difficult_word})
        if (s == to_string(k)) return k;
    fail(ErrorCode::parse, "unknown behavior kind '" + s + "'");
}

DwTrigger trigger_from(const std::string& s) {
    for (auto t : {DwTrigger::first_fixation, DwTrigger::refixations, DwTrigger::total_duration})
        if (s == to_string(t)) return t;
    fail(ErrorCode::parse, "unknown trigger '" + s + "'");
}

Json rect_json(const Rect& r) {
    return {{"left", r.left}, {"top", r.top}, {"right", r.right}, {"bottom", r.bottom}};
}

}  // namespace

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("malformed JSON: ") + e.what());
    }
}

Json to_json(const ScreenGeometry& g) {
    return {{"width_px", g.width_px},
            {"height_px", g.height_px},
            {"physical_width_cm", g.physical_width_cm},
            {"physical_height_cm", g.physical_height_cm},
            {"viewing_distance_cm", g.viewing_distance_cm}};
}

ScreenGeometry geometry_from_json(const Json& j) {
    constexpr auto code = ErrorCode::invalid_geometry;
    ScreenGeometry g = ScreenGeometry::study_default();
    std::optional<double> diagonal;
    bool physical = false;
    each_field(j, "geometry", code, [&](const std::string& k, const Json& v) {
        if (k == "width_px") g.width_px = static_cast<int>(as_int(v, k, code));
        else if (k == "height_px") g.height_px = static_cast<int>(as_int(v, k, code));
        else if (k == "physical_width_cm") { g.physical_width_cm = as_number(v, k, code); physical = true; }
        else if (k == "physical_height_cm") { g.physical_height_cm = as_number(v, k, code); physical = true; }
        else if (k == "viewing_distance_cm") g.viewing_distance_cm = as_number(v, k, code);
        else if (k == "diagonal_in") diagonal = as_number(v, k, code);
        else return false;
        return true;
    });
    if (diagonal && physical) fail(code, "give either diagonal_in or physical sizes, not both");
    if (diagonal) g = ScreenGeometry::from_diagonal(g.width_px, g.height_px, *diagonal, g.viewing_distance_cm);
    g.validate();
    return g;
}

Json to_json(const EngineConfig& c) {
    return {{"t_ls0_px", c.t_ls0_px},
            {"t_ls1_fraction", c.t_ls1_fraction},
            {"t_ls2_mode", "line_box_height"},
            {"t_dw0_us", c.t_dw0_us},
            {"t_dw1", c.t_dw1},
            {"t_dw2_us", c.t_dw2_us},
            {"fixation_dispersion_px", c.fixation_dispersion_px},
            {"min_fixation_duration_us", c.min_fixation_duration_us},
            {"jump_stability_count", c.jump_stability_count},
            {"vote_window", c.vote_window},
            {"scroll_pause_gap_us", c.scroll_pause_gap_us},
            {"stopword_suppression", c.stopword_suppression},
            {"blink_merge_us", c.blink_merge_us},
            {"median_window", c.median_window},
            {"max_velocity_deg_per_s", c.max_velocity_deg_per_s},
            {"sample_rate_hz", c.sample_rate_hz}};
}

EngineConfig engine_config_from_json(const Json& j, const EngineConfig& base) {
    constexpr auto code = ErrorCode::invalid_config;
    EngineConfig c = base;
    each_field(j, "engine config", code, [&](const std::string& k, const Json& v) {
        if (k == "t_ls0_px") c.t_ls0_px = as_number(v, k, code);
        else if (k == "t_ls1_fraction") c.t_ls1_fraction = as_number(v, k, code);
        else if (k == "t_ls2_mode") {
            if (as_string(v, k, code) != "line_box_height") fail(code, "t_ls2_mode must be 'line_box_height'");
        }
        else if (k == "t_dw0_us") c.t_dw0_us = as_int(v, k, code);
        else if (k == "t_dw1") c.t_dw1 = static_cast<int>(as_int(v, k, code));
        else if (k == "t_dw2_us") c.t_dw2_us = as_int(v, k, code);
        else if (k == "fixation_dispersion_px") c.fixation_dispersion_px = as_number(v, k, code);
        else if (k == "min_fixation_duration_us") c.min_fixation_duration_us = as_int(v, k, code);
        else if (k == "jump_stability_count") c.jump_stability_count = static_cast<int>(as_int(v, k, code));
        else if (k == "vote_window") c.vote_window = static_cast<int>(as_int(v, k, code));
        else if (k == "scroll_pause_gap_us") c.scroll_pause_gap_us = as_int(v, k, code);
        else if (k == "stopword_suppression") c.stopword_suppression = as_bool(v, k, code);
        else if (k == "blink_merge_us") c.blink_merge_us = as_int(v, k, code);
        else if (k == "median_window") c.median_window = static_cast<int>(as_int(v, k, code));
        else if (k == "max_velocity_deg_per_s") c.max_velocity_deg_per_s = as_number(v, k, code);
        else if (k == "sample_rate_hz") c.sample_rate_hz = as_number(v, k, code);
        else return false;
        return true;
    });
    c.validate();
    return c;
}

Json to_json(const AugmentationConfig& c) {
    Json j = {{"ls_mode", to_string(c.ls_mode)},
              {"dw_mode", to_string(c.dw_mode)},
              {"magnifier_scale", c.magnifier_scale},
              {"background", to_string(c.background)}};
    if (c.ls_color)
        j["ls_color"] = {{"hue", c.ls_color->hue}, {"saturation", HslColor::saturation}, {"lightness", c.ls_color->lightness}};
    else
        j["ls_color"] = nullptr;
    const Rgb rgb = c.line_color();
    j["ls_rgb"] = {rgb.r, rgb.g, rgb.b};
    return j;
}

AugmentationConfig augmentation_config_from_json(const Json& j, const AugmentationConfig& base) {
    constexpr auto code = ErrorCode::invalid_config;
    AugmentationConfig c = base;
    each_field(j, "augmentation config", code, [&](const std::string& k, const Json& v) {
        if (k == "ls_mode") {
            auto m = line_mode_from_string(as_string(v, k, code));
            if (!m) fail(code, "ls_mode must be highlight, arrow or off");
            c.ls_mode = *m;
        } else if (k == "dw_mode") {
            auto m = word_mode_from_string(as_string(v, k, code));
            if (!m) fail(code, "dw_mode must be magnify, tts or off");
            c.dw_mode = *m;
        } else if (k == "ls_color") {
            if (v.is_null()) {
                c.ls_color.reset();
                return true;
            }
            HslColor hsl;
            each_field(v, "ls_color", code, [&](const std::string& ck, const Json& cv) {
                if (ck == "hue") hsl.hue = as_number(cv, ck, code);
                else if (ck == "lightness") hsl.lightness = as_number(cv, ck, code);
                else if (ck == "saturation") {
                    if (as_number(cv, ck, code) != HslColor::saturation) fail(code, "saturation is fixed at 100");
                } else return false;
                return true;
            });
            c.ls_color = hsl;
        } else if (k == "magnifier_scale") c.magnifier_scale = as_number(v, k, code);
        else if (k == "background") c.background = background_from(as_string(v, k, code), code);
        else if (k == "ls_rgb") {}  // derived, echoed by to_json
        else return false;
        return true;
    });
    c.validate();
    return c;
}

Json to_json(const Viewport& v) { return {{"top", v.top}, {"height", v.height}, {"width", v.width}}; }

Viewport viewport_from_json(const Json& j, const Viewport& base) {
    constexpr auto code = ErrorCode::invalid_config;
    Viewport vp = base;
    each_field(j, "viewport", code, [&](const std::string& k, const Json& v) {
        if (k == "top") vp.top = as_number(v, k, code);
        else if (k == "height") vp.height = as_number(v, k, code);
        else if (k == "width") vp.width = as_number(v, k, code);
        else return false;
        return true;
    });
    if (!(vp.height > 0.0) || !(vp.width > 0.0)) fail(code, "viewport size must be positive");
    return vp;
}

Json to_json(const PageLayout& layout) {
    Json lines = Json::array();
    for (const auto& l : layout.lines)
        lines.push_back({{"line_id", l.line_id}, {"top", l.top}, {"bottom", l.bottom}, {"left", l.left}, {"right", l.right}});
    Json words = Json::array();
    for (const auto& w : layout.words)
        words.push_back({{"word_id", w.word_id},
                         {"line_id", w.line_id},
                         {"left", w.left},
                         {"right", w.right},
                         {"text", w.text},
                         {"function_word", w.function_word}});
    return {{"layout_version", layout.layout_version},
            {"background", to_string(layout.background)},
            {"text_width", layout.text_width},
            {"line_height", layout.line_height},
            {"lines", lines},
            {"words", words}};
}

PageLayout layout_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    PageLayout layout;
    layout.layout_version = static_cast<int>(as_int(require(j, "layout_version", code), "layout_version", code));
    if (auto it = j.find("background"); it != j.end())
        layout.background = background_from(as_string(*it, "background", code), code);
    for (const auto& l : require_array(j, "lines", code)) {
        LineBox b;
        b.line_id = static_cast<int>(as_int(require(l, "line_id", code), "line_id", code));
        b.top = as_number(require(l, "top", code), "top", code);
        b.bottom = as_number(require(l, "bottom", code), "bottom", code);
        b.left = as_number(require(l, "left", code), "left", code);
        b.right = as_number(require(l, "right", code), "right", code);
        layout.lines.push_back(b);
    }
    if (auto it = j.find("words"); it != j.end()) {
        if (!it->is_array()) fail(code, "field 'words' must be an array");
        for (const auto& w : *it) {
            WordBox b;
            b.word_id = static_cast<int>(as_int(require(w, "word_id", code), "word_id", code));
            b.line_id = static_cast<int>(as_int(require(w, "line_id", code), "line_id", code));
            b.left = as_number(require(w, "left", code), "left", code);
            b.right = as_number(require(w, "right", code), "right", code);
            if (auto t = w.find("text"); t != w.end()) b.text = as_string(*t, "text", code);
            if (auto f = w.find("function_word"); f != w.end()) b.function_word = as_bool(*f, "function_word", code);
            layout.words.push_back(std::move(b));
        }
    }
    refresh_layout_metrics(layout);
    if (auto it = j.find("text_width"); it != j.end()) layout.text_width = as_number(*it, "text_width", code);
    if (auto it = j.find("line_height"); it != j.end()) layout.line_height = as_number(*it, "line_height", code);
    return layout;
}

Json id_map_to_json(const IdMap& map) {
    std::vector<std::pair<int, int>> sorted(map.begin(), map.end());
    std::sort(sorted.begin(), sorted.end());
    Json out = Json::array();
    for (const auto& [a, b] : sorted) out.push_back({a, b});
    return out;
}

IdMap id_map_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    if (!j.is_array()) fail(code, "id map must be an array of [old, new] pairs");
    IdMap map;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) fail(code, "id map entries must be [old, new] pairs");
        map[static_cast<int>(as_int(pair[0], "old", code))] = static_cast<int>(as_int(pair[1], "new", code));
    }
    return map;
}

Json to_json(const GazeSample& s) {
    return {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"valid", s.valid}, {"eye", std::string(1, eye_code(s.eye))}};
}

GazeSample gaze_sample_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    GazeSample s;
    s.t = as_int(require(j, "t", code), "t", code);
    s.valid = true;
    if (auto it = j.find("valid"); it != j.end()) s.valid = as_bool(*it, "valid", code);
    if (s.valid) {
        s.x = as_number(require(j, "x", code), "x", code);
        s.y = as_number(require(j, "y", code), "y", code);
    } else {
        if (auto it = j.find("x"); it != j.end() && !it->is_null()) s.x = as_number(*it, "x", code);
        if (auto it = j.find("y"); it != j.end() && !it->is_null()) s.y = as_number(*it, "y", code);
    }
    if (auto it = j.find("eye"); it != j.end()) {
        const std::string e = as_string(*it, "eye", code);
        auto eye = e.size() == 1 ? eye_from_code(e[0]) : std::nullopt;
        if (!eye) fail(code, "eye must be L, R or A");
        s.eye = *eye;
    }
    return s;
}

Json to_json(const Fixation& f) {
    return {{"cx", f.cx},
            {"cy", f.cy},
            {"onset", f.onset},
            {"duration", f.duration},
            {"sample_count", f.sample_count},
            {"layout_version", f.layout_version}};
}

Fixation fixation_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    Fixation f;
    f.cx = as_number(require(j, "cx", code), "cx", code);
    f.cy = as_number(require(j, "cy", code), "cy", code);
    f.onset = as_int(require(j, "onset", code), "onset", code);
    f.duration = as_int(require(j, "duration", code), "duration", code);
    f.sample_count = static_cast<int>(as_int(require(j, "sample_count", code), "sample_count", code));
    if (auto v = opt_int(j, "layout_version")) f.layout_version = *v;
    return f;
}

Json to_json(const BehaviorEvent& e) {
    Json j = {{"kind", to_string(e.kind)}, {"line_id", e.line_id}, {"at", e.at}, {"layout_version", e.layout_version}};
    j["from_line"] = e.from_line ? Json(*e.from_line) : Json(nullptr);
    if (e.word_id) j["word_id"] = *e.word_id;
    if (e.trigger) j["trigger"] = to_string(*e.trigger);
    return j;
}

BehaviorEvent behavior_event_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    BehaviorEvent e;
    e.kind = behavior_kind_from(as_string(require(j, "kind", code), "kind", code));
    e.line_id = static_cast<int>(as_int(require(j, "line_id", code), "line_id", code));
    e.at = as_int(require(j, "at", code), "at", code);
    if (auto v = opt_int(j, "layout_version")) e.layout_version = *v;
    e.from_line = opt_int(j, "from_line");
    e.word_id = opt_int(j, "word_id");
    if (auto it = j.find("trigger"); it != j.end() && !it->is_null())
        e.trigger = trigger_from(as_string(*it, "trigger", code));
    return e;
}

Json to_json(const AugmentationEvent& e) {
    Json j = {{"kind", to_string(e.kind)}, {"at", e.at}, {"layout_version", e.layout_version}};
    if (e.line_id) j["line_id"] = *e.line_id;
    if (e.word_id) j["word_id"] = *e.word_id;
    if (e.placement) j["placement"] = to_string(*e.placement);
    if (e.color) j["color"] = {e.color->r, e.color->g, e.color->b};
    if (e.bounds) j["bounds"] = rect_json(*e.bounds);
    if (e.text) j["text"] = *e.text;
    return j;
}

Json to_json(const DriftProfile& p) {
    return {{"calibrated_line_ys", p.calibrated_line_ys}, {"per_line_offset", p.per_line_offset}};
}

DriftProfile drift_profile_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    DriftProfile p;
    for (const auto& v : require_array(j, "calibrated_line_ys", code)) p.calibrated_line_ys.push_back(as_number(v, "calibrated_line_ys", code));
    for (const auto& v : require_array(j, "per_line_offset", code)) p.per_line_offset.push_back(as_number(v, "per_line_offset", code));
    p.validate();
    return p;
}

Json to_json(const TargetLayout& t, const ScreenGeometry& geom) {
    Json targets = Json::array();
    for (const auto& p : t.targets)
        targets.push_back({{"x_frac", p.x_frac},
                           {"y_frac", p.y_frac},
                           {"x_px", p.x_frac * geom.width_px},
                           {"y_px", p.y_frac * geom.height_px}});
    Json j = {{"kind", to_string(t.kind)}, {"target_radius_px", t.target_radius_px}, {"targets", targets}};
    if (t.is_sweep()) {
        Json sweeps = Json::array();
        for (const auto& s : sweep_trajectories(t, geom))
            sweeps.push_back({{"y_px", s.y_px}, {"start_x", s.start_x}, {"end_x", s.end_x},
                              {"duration_us", s.duration}, {"easing", "smoothstep"}});
        j["sweeps"] = sweeps;
    }
    return j;
}

Json to_json(const ReaderProfile& p) {
    Json drift = Json::array();
    for (const auto& [y, o] : p.drift) drift.push_back({y, o});
    return {{"fixation_mean_ms", p.fixation_mean_ms},
            {"fixation_sd_ms", p.fixation_sd_ms},
            {"fixation_min_ms", p.fixation_min_ms},
            {"fixation_max_ms", p.fixation_max_ms},
            {"skip_probability", p.skip_probability},
            {"min_saccade_px", p.min_saccade_px},
            {"hesitation_probability", p.hesitation_probability},
            {"sweep_undershoot_lines", p.sweep_undershoot_lines},
            {"max_deviation_lines", p.max_deviation_lines},
            {"revisit_probability", p.revisit_probability},
            {"scroll_every_lines", p.scroll_every_lines},
            {"noise_sd_px", p.noise_sd_px},
            {"drift", drift},
            {"data_loss_rate", p.data_loss_rate},
            {"sample_rate_hz", p.sample_rate_hz},
            {"saccade_gap_samples", p.saccade_gap_samples},
            {"sweep_gap_samples", p.sweep_gap_samples},
            {"jump_gap_samples", p.jump_gap_samples},
            {"seed", p.seed}};
}

ReaderProfile reader_profile_from_json(const Json& j, const ReaderProfile& base) {
    constexpr auto code = ErrorCode::invalid_config;
    ReaderProfile p = base;
    each_field(j, "reader profile", code, [&](const std::string& k, const Json& v) {
        if (k == "fixation_mean_ms") p.fixation_mean_ms = as_number(v, k, code);
        else if (k == "fixation_sd_ms") p.fixation_sd_ms = as_number(v, k, code);
        else if (k == "fixation_min_ms") p.fixation_min_ms = as_number(v, k, code);
        else if (k == "fixation_max_ms") p.fixation_max_ms = as_number(v, k, code);
        else if (k == "skip_probability") p.skip_probability = as_number(v, k, code);
        else if (k == "min_saccade_px") p.min_saccade_px = as_number(v, k, code);
        else if (k == "hesitation_probability") p.hesitation_probability = as_number(v, k, code);
        else if (k == "sweep_undershoot_lines") p.sweep_undershoot_lines = as_number(v, k, code);
        else if (k == "max_deviation_lines") p.max_deviation_lines = static_cast<int>(as_int(v, k, code));
        else if (k == "revisit_probability") p.revisit_probability = as_number(v, k, code);
        else if (k == "scroll_every_lines") p.scroll_every_lines = static_cast<int>(as_int(v, k, code));
        else if (k == "noise_sd_px") p.noise_sd_px = as_number(v, k, code);
        else if (k == "drift") {
            if (!v.is_array()) fail(code, "drift must be an array of [y, offset] knots");
            p.drift.clear();
            for (const auto& knot : v) {
                if (!knot.is_array() || knot.size() != 2) fail(code, "drift knots must be [y, offset] pairs");
                p.drift.emplace_back(as_number(knot[0], "drift y", code), as_number(knot[1], "drift offset", code));
            }
        }
        else if (k == "data_loss_rate") p.data_loss_rate = as_number(v, k, code);
        else if (k == "sample_rate_hz") p.sample_rate_hz = as_number(v, k, code);
        else if (k == "saccade_gap_samples") p.saccade_gap_samples = static_cast<int>(as_int(v, k, code));
        else if (k == "sweep_gap_samples") p.sweep_gap_samples = static_cast<int>(as_int(v, k, code));
        else if (k == "jump_gap_samples") p.jump_gap_samples = static_cast<int>(as_int(v, k, code));
        else if (k == "seed") {
            if (!v.is_number_unsigned()) fail(code, "seed must be a non-negative integer");
            p.seed = v.get<std::uint64_t>();
        }
        else return false;
        return true;
    });
    p.validate();
    return p;
}

Json to_json(const GroundTruth& t) {
    Json fixations = Json::array();
    for (const auto& f : t.fixations) {
        Json jf = {{"line", f.line}, {"x", f.x}, {"y", f.y}, {"onset", f.onset}, {"end", f.end},
                   {"layout_version", f.layout_version}};
        jf["word"] = f.word ? Json(*f.word) : Json(nullptr);
        fixations.push_back(jf);
    }
    Json sweeps = Json::array();
    for (const auto& s : t.sweeps)
        sweeps.push_back({{"from_line", s.from_line}, {"target_line", s.target_line}, {"landed_line", s.landed_line}, {"at", s.at}});
    Json deviations = Json::array();
    for (const auto& d : t.deviations)
        deviations.push_back({{"wrong_line", d.wrong_line}, {"target_line", d.target_line}, {"at", d.at}});
    Json jumps = Json::array();
    for (const auto& jp : t.jumps) jumps.push_back({{"from_line", jp.from_line}, {"line", jp.line}, {"at", jp.at}});
    Json words = Json::array();
    for (const auto& w : t.difficult_words)
        words.push_back({{"word", w.word}, {"trigger", to_string(w.trigger)}, {"at", w.at}});
    Json scrolls = Json::array();
    for (const auto& s : t.scrolls) scrolls.push_back({{"t", s.scroll.t}, {"dy", s.scroll.dy}, {"layout_version", s.layout_version}});
    return {{"fixations", fixations}, {"sweeps", sweeps},       {"deviations", deviations},
            {"jumps", jumps},         {"difficult_words", words}, {"scrolls", scrolls},
            {"sample_fixation", t.sample_fixation}};
}

GroundTruth ground_truth_from_json(const Json& j) {
    constexpr auto code = ErrorCode::parse;
    auto num = [&](const Json& o, const char* k) { return as_number(require(o, k, code), k, code); };
    auto integer = [&](const Json& o, const char* k) { return as_int(require(o, k, code), k, code); };
    auto list = [&](const char* k) -> const Json& {
        static const Json empty = Json::array();
        auto it = j.find(k);
        if (it == j.end()) return empty;
        if (!it->is_array()) fail(code, std::string("field '") + k + "' must be an array");
        return *it;
    };
    if (!j.is_object()) fail(code, "ground truth must be an object");
    GroundTruth t;
    for (const auto& f : list("fixations")) {
        TruthFixation tf;
        tf.line = static_cast<int>(integer(f, "line"));
        tf.word = opt_int(f, "word");
        tf.x = num(f, "x");
        tf.y = num(f, "y");
        tf.onset = integer(f, "onset");
        tf.end = integer(f, "end");
        if (auto v = opt_int(f, "layout_version")) tf.layout_version = *v;
        t.fixations.push_back(tf);
    }
    for (const auto& s : list("sweeps"))
        t.sweeps.push_back({static_cast<int>(integer(s, "from_line")), static_cast<int>(integer(s, "target_line")),
                            static_cast<int>(integer(s, "landed_line")), integer(s, "at")});
    for (const auto& d : list("deviations"))
        t.deviations.push_back({static_cast<int>(integer(d, "wrong_line")), static_cast<int>(integer(d, "target_line")),
                                integer(d, "at")});
    for (const auto& jp : list("jumps"))
        t.jumps.push_back({static_cast<int>(integer(jp, "from_line")), static_cast<int>(integer(jp, "line")), integer(jp, "at")});
    for (const auto& w : list("difficult_words"))
        t.difficult_words.push_back({static_cast<int>(integer(w, "word")),
                                     trigger_from(as_string(require(w, "trigger", code), "trigger", code)), integer(w, "at")});
    for (const auto& s : list("scrolls"))
        t.scrolls.push_back({{integer(s, "t"), num(s, "dy")}, static_cast<int>(integer(s, "layout_version"))});
    for (const auto& v : list("sample_fixation")) t.sample_fixation.push_back(static_cast<int>(as_int(v, "sample_fixation", code)));
    return t;
}

Json to_json(const PassageMetrics& m) {
    Json one_pass = Json::object();
    for (const auto& [w, ms] : m.one_pass_ms) one_pass[std::to_string(w)] = ms;
    Json switches = Json::array();
    for (const auto& s : m.line_switches) {
        Json js = {{"from_line", s.from_line}, {"target_line", s.target_line}, {"end_of_line_offset", s.end_of_line_offset}};
        js["settled_onset"] = s.settled_onset ? Json(*s.settled_onset) : Json(nullptr);
        js["time_ms"] = s.settled_onset ? Json(s.time_ms()) : Json(nullptr);
        switches.push_back(js);
    }
    Json deviations = Json::array();
    for (const auto& d : m.deviations)
        deviations.push_back({{"landed_line", d.landed_line}, {"target_line", d.target_line}, {"magnitude", d.magnitude()}, {"at", d.at}});
    Json j = {{"line_count", m.line_count},
              {"mean_line_switch_time_ms", m.mean_line_switch_time_ms},
              {"line_switches", switches},
              {"deviation_count", m.deviations.size()},
              {"deviation_frequency", m.deviation_frequency},
              {"mean_deviation_magnitude_lines", m.mean_deviation_magnitude_lines},
              {"deviations", deviations},
              {"max_one_pass_fixation_ms", m.max_one_pass_fixation_ms},
              {"one_pass_ms", one_pass},
              {"scroll_event_count", m.scroll_event_count},
              {"mean_scroll_distance_px", m.mean_scroll_distance_px},
              {"scroll_distances_px", m.scroll_distances_px},
              {"data_loss_fraction", m.data_loss_fraction},
              {"warnings", m.warnings}};
    j["max_one_pass_word"] = m.max_one_pass_word ? Json(*m.max_one_pass_word) : Json(nullptr);
    return j;
}

}  // namespace gazeprompt
