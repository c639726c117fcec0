#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gazeprompt/behavior.hpp"
#include "gazeprompt/error.hpp"
#include "gazeprompt/formats.hpp"
#include "gazeprompt/json_io.hpp"
#include "gazeprompt/metrics.hpp"
#include "gazeprompt/session.hpp"
#include "gazeprompt/signal.hpp"
#include "gazeprompt/simulator.hpp"
#include "gazeprompt/text_layout.hpp"

namespace py = pybind11;
using namespace gazeprompt;

namespace {

// JSON text crosses the boundary; the Python side decodes it.
std::string dumps(const Json& j) { return dump_line(j); }

EngineConfig engine_from(const std::string& text) {
    return text.empty() ? EngineConfig{} : engine_config_from_json(parse_json(text));
}

ScreenGeometry geometry_from(const std::string& text) {
    return text.empty() ? ScreenGeometry::study_default() : geometry_from_json(parse_json(text));
}

std::vector<GazeSample> samples_from(const std::string& text) {
    const Json j = parse_json(text);
    if (!j.is_array()) throw Error(ErrorCode::parse, "samples must be a JSON array");
    std::vector<GazeSample> out;
    out.reserve(j.size());
    for (const auto& s : j) out.push_back(gaze_sample_from_json(s));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Gaze-driven reading engine";

    static py::handle error_type = py::exception<Error>(m, "Error", PyExc_RuntimeError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error_type.ptr(), (std::string(to_string(e.code())) + ": " + e.what()).c_str());
        }
    });

    m.attr("DEFAULT_PORT") = kDefaultPort;

    m.def("default_engine_config", [] { return dumps(to_json(EngineConfig{})); });
    m.def("default_augmentation_config", [] { return dumps(to_json(AugmentationConfig{})); });
    m.def("default_reader_profile", [] { return dumps(to_json(ReaderProfile{})); });
    m.def("validate_engine_config", [](const std::string& text) { return dumps(to_json(engine_from(text))); });

    m.def(
        "degrees_to_px",
        [](double deg, bool vertical, const std::string& geom) {
            return degrees_to_px(deg, vertical ? Axis::vertical : Axis::horizontal, geometry_from(geom));
        },
        py::arg("degrees"), py::arg("vertical") = false, py::arg("geometry") = "");
    m.def(
        "px_to_degrees",
        [](double px, bool vertical, const std::string& geom) {
            return px_to_degrees(px, vertical ? Axis::vertical : Axis::horizontal, geometry_from(geom));
        },
        py::arg("px"), py::arg("vertical") = false, py::arg("geometry") = "");

    m.def(
        "typeset",
        [](const std::string& text, double font_px, int layout_version) {
            TextStyle style;
            style.font_px = font_px;
            return dumps(to_json(build_layout(text, style, layout_version)));
        },
        py::arg("text"), py::arg("font_px") = 48.0, py::arg("layout_version") = 0);
    m.def("random_passage", &random_passage, py::arg("word_count"), py::arg("seed"));

    m.def("parse_gaze_log", [](const std::string& text) {
        const GazeLog log = parse_gaze_log(text);
        Json samples = Json::array();
        for (const auto& s : log.samples) samples.push_back(to_json(s));
        return dumps(Json{{"sample_rate_hz", log.sample_rate_hz}, {"samples", samples}});
    });
    m.def(
        "emit_gaze_log",
        [](const std::string& samples, double hz) {
            GazeLog log;
            log.sample_rate_hz = hz;
            log.samples = samples_from(samples);
            return emit_gaze_log(log);
        },
        py::arg("samples"), py::arg("sample_rate_hz") = 120.0);

    m.def(
        "detect_fixations",
        [](const std::string& samples, const std::string& config, const std::string& geom) {
            const auto s = samples_from(samples);
            const SignalSummary r = detect_fixations(s, engine_from(config), geometry_from(geom));
            Json fx = Json::array();
            for (const auto& f : r.fixations) fx.push_back(to_json(f));
            return dumps(Json{{"fixations", fx},
                              {"total", r.total},
                              {"invalid", r.invalid},
                              {"outliers", r.outliers},
                              {"discarded", r.discarded},
                              {"in_fixations", r.in_fixations}});
        },
        py::arg("samples"), py::arg("config") = "", py::arg("geometry") = "");

    m.def("identify_line", [](const std::string& fixations, const std::string& layout) {
        const Json j = parse_json(fixations);
        std::vector<Fixation> fx;
        for (const auto& f : j) fx.push_back(fixation_from_json(f));
        const auto id = identify_line(fx, layout_from_json(parse_json(layout)));
        Json totals = Json::object();
        for (const auto& [line, w] : id.totals) totals[std::to_string(line)] = w;
        return dumps(Json{{"line", id.line}, {"totals", totals}});
    });

    m.def(
        "simulate",
        [](const std::string& layout, const std::string& profile) {
            const ReaderProfile p = profile.empty() ? ReaderProfile{} : reader_profile_from_json(parse_json(profile));
            const Simulation sim = simulate(layout_from_json(parse_json(layout)), p);
            GazeLog log;
            log.sample_rate_hz = p.sample_rate_hz;
            log.samples = sim.samples;
            return py::make_tuple(emit_gaze_log(log), dumps(to_json(sim.truth)));
        },
        py::arg("layout"), py::arg("profile") = "");

    m.def(
        "run_gaze_log",
        [](const std::string& gaze_log, const std::string& layout, const std::string& truth,
           const std::string& settings) {
            const GazeLog log = parse_gaze_log(gaze_log);
            RunOptions opt;
            if (!settings.empty()) opt.settings = session_settings_from_json(parse_json(settings));
            opt.settings.engine.sample_rate_hz = log.sample_rate_hz;
            opt.layout = layout_from_json(parse_json(layout));
            std::optional<GroundTruth> gt;
            if (!truth.empty()) {
                gt = ground_truth_from_json(parse_json(truth));
                opt.layout_changes = layout_schedule(opt.layout, *gt);
            }
            VectorSource src(log.samples);
            const SessionLog session_log = run_session(src, nullptr, opt);
            const ReplayResult r = replay_session_log(session_log.text());
            const PassageMetrics metrics = compute_metrics(r.metrics_input, r.layouts, gt ? &*gt : nullptr,
                                                           opt.settings.engine.scroll_pause_gap_us);
            return py::make_tuple(session_log.text(), dumps(to_json(metrics)));
        },
        py::arg("gaze_log"), py::arg("layout"), py::arg("truth") = "", py::arg("settings") = "");

    m.def("replay_session_log", [](const std::string& text) {
        const ReplayResult r = replay_session_log(text);
        return py::make_tuple(r.identical(), r.replayed_log);
    });

    py::class_<Session>(m, "Session")
        .def(py::init([](const std::string& id, const std::string& settings) {
                 return std::make_unique<Session>(
                     id, settings.empty() ? SessionSettings{} : session_settings_from_json(parse_json(settings)));
             }),
             py::arg("session_id") = "py", py::arg("settings") = "")
        .def("handle_line",
             [](Session& s, const std::string& line, Micros wall_us) {
                 std::vector<std::string> out;
                 for (const auto& m : s.handle_line(line, wall_us)) out.push_back(dumps(m));
                 return out;
             })
        .def("tick",
             [](Session& s, Micros wall_us) {
                 std::vector<std::string> out;
                 for (const auto& m : s.tick(wall_us)) out.push_back(dumps(m));
                 return out;
             })
        .def_property_readonly("phase", [](const Session& s) { return std::string(to_string(s.phase())); })
        .def_property_readonly("ended", &Session::ended)
        .def("log_text", [](const Session& s) { return s.log().text(); });
}
