#include "gazeprompt/session.hpp"

#include <cstdlib>

#include "gazeprompt/error.hpp"
#include "gazeprompt/formats.hpp"

namespace gazeprompt {

const char* to_string(Phase phase) {
    switch (phase) {
        case Phase::configuring: return "configuring";
        case Phase::calibrating: return "calibrating";
        case Phase::validating: return "validating";
        case Phase::reading: return "reading";
        case Phase::ended: return "ended";
    }
    return "configuring";
}

std::optional<Phase> phase_from_string(const std::string& s) {
    for (auto p : {Phase::configuring, Phase::calibrating, Phase::validating, Phase::reading, Phase::ended})
        if (s == to_string(p)) return p;
    return std::nullopt;
}

Json to_json(const SessionSettings& s) {
    return {{"engine", to_json(s.engine)},
            {"augmentation", to_json(s.augmentation)},
            {"geometry", to_json(s.geometry)},
            {"viewport", to_json(s.viewport)},
            {"stall_timeout_us", s.stall_timeout_us},
            {"debug_fixations", s.debug_fixations}};
}

SessionSettings session_settings_from_json(const Json& j, const SessionSettings& base) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_config, "settings must be an object");
    SessionSettings s = base;
    for (const auto& [key, value] : j.items()) {
        if (key == "engine") s.engine = engine_config_from_json(value, s.engine);
        else if (key == "augmentation") s.augmentation = augmentation_config_from_json(value, s.augmentation);
        else if (key == "geometry") s.geometry = geometry_from_json(value);
        else if (key == "viewport") s.viewport = viewport_from_json(value, s.viewport);
        else if (key == "stall_timeout_us") {
            if (!value.is_number_integer() || value.get<std::int64_t>() <= 0)
                throw Error(ErrorCode::invalid_config, "stall_timeout_us must be a positive integer");
            s.stall_timeout_us = value.get<std::int64_t>();
        } else if (key == "debug_fixations") {
            if (!value.is_boolean()) throw Error(ErrorCode::invalid_config, "debug_fixations must be a boolean");
            s.debug_fixations = value.get<bool>();
        } else {
            throw Error(ErrorCode::invalid_config, "unknown settings field '" + key + "'");
        }
    }
    return s;
}

SessionSettings load_settings(const std::optional<std::string>& path) {
    std::optional<std::string> file = path;
    if (!file)
        if (const char* env = std::getenv("GAZEPROMPT_CONFIG"); env && *env) file = env;
    if (!file) return {};
    return session_settings_from_json(parse_json(read_file(*file)));
}

SessionLog::SessionLog(std::string session_id, const SessionSettings& settings) {
    Json header = {{"log", "gazeprompt-session"}, {"version", 1}, {"session", session_id},
                   {"settings", to_json(settings)}};
    lines_.push_back(header.dump());
}

namespace {

std::string to_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out += digits[c >> 4];
        out += digits[c & 15];
    }
    return out;
}

std::string from_hex(const std::string& hex, std::size_t line) {
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw ParseError(line, "raw_hex is not lowercase hex");
    };
    if (hex.size() % 2) throw ParseError(line, "raw_hex has odd length");
    std::string out;
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out += static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1]));
    return out;
}

}  // namespace

void SessionLog::inbound(std::string_view raw, Micros wall_us) {
    Json j = {{"dir", "in"}, {"wall_us", wall_us}, {"raw", std::string(raw)}};
    try {
        lines_.push_back(j.dump());
    } catch (const nlohmann::json::type_error&) {
        // not valid UTF-8: keep the exact bytes
        j.erase("raw");
        j["raw_hex"] = to_hex(raw);
        lines_.push_back(j.dump());
    }
}

void SessionLog::tick(Micros wall_us) {
    lines_.push_back(Json{{"dir", "tick"}, {"wall_us", wall_us}}.dump());
}

void SessionLog::transport_error(const std::string& message, Micros wall_us) {
    lines_.push_back(dump_line(Json{{"dir", "transport_error"}, {"wall_us", wall_us}, {"message", message}}));
}

void SessionLog::outbound(const Json& msg) {
    lines_.push_back(dump_line(Json{{"dir", "out"}, {"msg", msg}}));
}

std::string SessionLog::text() const {
    std::string out;
    for (const auto& l : lines_) {
        out += l;
        out += '\n';
    }
    return out;
}

namespace {

bool signal_params_equal(const EngineConfig& a, const EngineConfig& b) {
    return a.fixation_dispersion_px == b.fixation_dispersion_px &&
           a.min_fixation_duration_us == b.min_fixation_duration_us && a.blink_merge_us == b.blink_merge_us &&
           a.median_window == b.median_window && a.max_velocity_deg_per_s == b.max_velocity_deg_per_s &&
           a.sample_rate_hz == b.sample_rate_hz;
}

int phase_rank(Phase p) { return static_cast<int>(p); }

bool fatal_code(ErrorCode code) {
    return code == ErrorCode::stream_order || code == ErrorCode::protocol || code == ErrorCode::no_layout;
}

const std::string kEyes = "LRA";

}  // namespace

Session::Session(std::string session_id, const SessionSettings& settings)
    : id_(std::move(session_id)), settings_(settings), log_(id_, settings) {
    settings_.engine.validate();
    settings_.augmentation.validate();
    settings_.geometry.validate();
}

std::vector<double> Session::latencies_us() const {
    return pipeline_ ? pipeline_->latencies_us() : std::vector<double>{};
}

Json Session::envelope(const std::string& type, Json payload) {
    return {{"type", type}, {"session", id_}, {"seq", ++out_seq_}, {"payload", std::move(payload)}};
}

void Session::error(std::vector<Json>& out, const std::string& code, const std::string& message, bool fatal,
                    std::optional<std::int64_t> in_reply_to) {
    Json payload = {{"code", code}, {"message", message}, {"fatal", fatal}};
    payload["in_reply_to"] = in_reply_to ? Json(*in_reply_to) : Json(nullptr);
    out.push_back(envelope("error", std::move(payload)));
    if (fatal) phase_ = Phase::ended;
}

std::vector<Json> Session::handle_line(std::string_view line, Micros wall_us) {
    log_.inbound(line, wall_us);
    std::vector<Json> out;
    current_seq_.reset();

    if (phase_ == Phase::ended) {
        error(out, "session_ended", "session has ended", false);
    } else {
        Json msg;
        bool ok = true;
        try {
            msg = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            error(out, "parse", std::string("malformed JSON: ") + e.what(), false);
            ok = false;
        }
        if (ok) {
            if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string() || !msg.contains("seq") ||
                !msg["seq"].is_number_integer() ||
                (msg.contains("payload") && !msg["payload"].is_object() && !msg["payload"].is_null()) ||
                (msg.contains("session") && !msg["session"].is_string())) {
                error(out, "protocol", "envelope needs string 'type', integer 'seq' and object 'payload'", false);
            } else {
                const std::int64_t seq = msg["seq"].get<std::int64_t>();
                current_seq_ = seq;
                if (last_in_seq_ && seq <= *last_in_seq_) {
                    error(out, "protocol",
                          "seq " + std::to_string(seq) + " does not follow " + std::to_string(*last_in_seq_), true, seq);
                } else {
                    last_in_seq_ = seq;
                    last_in_wall_ = wall_us;
                    dispatch(msg, out);
                }
            }
        }
    }
    for (const auto& m : out) log_.outbound(m);
    return out;
}

std::vector<Json> Session::tick(Micros wall_us) {
    std::vector<Json> out;
    if (phase_ == Phase::reading && !paused_ && last_gaze_wall_ &&
        wall_us - *last_gaze_wall_ > settings_.stall_timeout_us) {
        paused_ = true;
        current_seq_.reset();
        error(out, "source_stall",
              "no gaze for " + std::to_string((wall_us - *last_gaze_wall_) / 1000) + " ms; session paused", false);
        log_.tick(wall_us);
        for (const auto& m : out) log_.outbound(m);
    }
    return out;
}

std::vector<Json> Session::transport_error(const std::string& message, Micros wall_us) {
    log_.transport_error(message, wall_us);
    std::vector<Json> out;
    current_seq_.reset();
    error(out, "protocol", message, true);
    for (const auto& m : out) log_.outbound(m);
    return out;
}

void Session::dispatch(const Json& msg, std::vector<Json>& out) {
    const std::string type = msg["type"].get<std::string>();
    const Json payload = msg.contains("payload") && msg["payload"].is_object() ? msg["payload"] : Json::object();
    try {
        if (type == "hello") on_hello(payload, out);
        else if (type == "configure") on_configure(payload, out);
        else if (type == "layout") on_layout(payload, out);
        else if (type == "gaze") on_gaze(payload, out);
        else if (type == "scroll") on_scroll(payload, out);
        else if (type == "phase") on_phase(payload, out);
        else error(out, "unknown_type", "unknown message type '" + type + "'", false, current_seq_);
    } catch (const Error& e) {
        error(out, to_string(e.code()), e.what(), fatal_code(e.code()), current_seq_);
    } catch (const nlohmann::json::exception& e) {
        error(out, "parse", e.what(), false, current_seq_);
    }
}

void Session::on_hello(const Json& payload, std::vector<Json>& out) {
    (void)out;
    auto caps = payload.find("capabilities");
    if (caps == payload.end()) return;
    if (!caps->is_object()) throw Error(ErrorCode::parse, "capabilities must be an object");
    if (auto it = caps->find("magnifier_scale_max"); it != caps->end()) {
        if (!it->is_number() || !(it->get<double>() >= 1.0))
            throw Error(ErrorCode::invalid_config, "magnifier_scale_max must be a number >= 1");
        AugmentationConfig cfg = settings_.augmentation;
        cfg.magnifier_scale = it->get<double>();
        settings_.augmentation = cfg;
        if (pipeline_) emit_events(pipeline_->set_augmentation_config(cfg, last_sample_t_.value_or(0)), out);
    }
}

void Session::on_configure(const Json& payload, std::vector<Json>& out) {
    if (phase_ != Phase::configuring && phase_ != Phase::reading)
        throw Error(ErrorCode::invalid_config, std::string("cannot configure while ") + to_string(phase_));
    const SessionSettings next = session_settings_from_json(payload, settings_);
    if (pipeline_) {
        if (!signal_params_equal(next.engine, settings_.engine))
            throw Error(ErrorCode::invalid_config, "signal parameters are fixed once reading has started");
        if (payload.contains("geometry"))
            throw Error(ErrorCode::invalid_config, "geometry is fixed once reading has started");
    }
    settings_ = next;
    if (pipeline_) {
        pipeline_->set_engine_config(settings_.engine);
        pipeline_->set_viewport(settings_.viewport);
        emit_events(pipeline_->set_augmentation_config(settings_.augmentation, last_sample_t_.value_or(0)), out);
    }
}

void Session::on_layout(const Json& payload, std::vector<Json>& out) {
    const PageLayout layout = layout_from_json(payload.at("layout"));
    double dy = 0.0;
    if (auto it = payload.find("scroll_dy"); it != payload.end() && !it->is_null()) {
        if (!it->is_number()) throw Error(ErrorCode::parse, "scroll_dy must be a number");
        dy = it->get<double>();
    }
    std::optional<IdMap> line_map, word_map;
    if (auto it = payload.find("line_map"); it != payload.end() && !it->is_null()) line_map = id_map_from_json(*it);
    if (auto it = payload.find("word_map"); it != payload.end() && !it->is_null()) word_map = id_map_from_json(*it);

    if (auto v = validate_layout(layout); !v.empty()) {
        std::string msg = "layout rejected:";
        for (const auto& violation : v) msg += " " + violation.message + ";";
        throw Error(ErrorCode::no_layout, msg);
    }
    if (pipeline_) {
        emit_events(pipeline_->set_layout(layout, dy, line_map ? &*line_map : nullptr,
                                          word_map ? &*word_map : nullptr, last_sample_t_.value_or(0)),
                    out);
    } else {
        if (pending_layout_ && layout.layout_version <= pending_layout_->layout_version)
            throw Error(ErrorCode::protocol, "layout version " + std::to_string(layout.layout_version) +
                                                 " does not advance past " +
                                                 std::to_string(pending_layout_->layout_version));
        pending_layout_ = layout;
    }
    layouts_.add(layout);
}

void Session::on_scroll(const Json& payload, std::vector<Json>& out) {
    (void)out;
    ScrollEvent s;
    if (!payload.contains("t") || !payload["t"].is_number_integer())
        throw Error(ErrorCode::parse, "scroll needs integer 't'");
    if (!payload.contains("dy") || !payload["dy"].is_number()) throw Error(ErrorCode::parse, "scroll needs number 'dy'");
    s.t = payload["t"].get<Micros>();
    s.dy = payload["dy"].get<double>();
    metrics_input_.scrolls.push_back(s);
}

void Session::on_gaze(const Json& payload, std::vector<Json>& out) {
    std::optional<int> target;
    if (auto it = payload.find("target"); it != payload.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw Error(ErrorCode::parse, "target must be an integer");
        target = it->get<int>();
    }
    std::vector<GazeSample> samples;
    if (auto it = payload.find("samples"); it != payload.end()) {
        if (!it->is_array()) throw Error(ErrorCode::parse, "samples must be an array");
        for (const auto& s : *it) samples.push_back(gaze_sample_from_json(s));
    } else {
        samples.push_back(gaze_sample_from_json(payload));
    }
    for (const auto& s : samples) {
        if (last_sample_t_ && s.t <= *last_sample_t_)
            throw Error(ErrorCode::stream_order, "gaze timestamp " + std::to_string(s.t) +
                                                     " does not follow " + std::to_string(*last_sample_t_));
        last_sample_t_ = s.t;
    }

    if (phase_ == Phase::reading) {
        if (!paused_ && last_gaze_wall_ && last_in_wall_ - *last_gaze_wall_ > settings_.stall_timeout_us)
            error(out, "source_stall",
                  "no gaze for " + std::to_string((last_in_wall_ - *last_gaze_wall_) / 1000) + " ms", false);
        paused_ = false;
        last_gaze_wall_ = last_in_wall_;
    }
    for (const auto& s : samples) accept_sample(s, target, out);
}

void Session::accept_sample(const GazeSample& s, std::optional<int> target, std::vector<Json>& out) {
    switch (phase_) {
        case Phase::calibrating:
        case Phase::validating:
            if (!step_) return;
            if (!target) throw Error(ErrorCode::parse, "calibration gaze needs a 'target' index");
            step_->samples[*target].push_back(s);
            return;
        case Phase::reading: {
            if (selected_eye_ && s.eye != *selected_eye_) return;
            emit_events(pipeline_->push(s), out);
            ++metrics_input_.total_samples;
            if (!s.valid) ++metrics_input_.invalid_samples;
            return;
        }
        default:
            return;  // gaze outside calibration and reading is ignored
    }
}

void Session::ensure_pipeline() {
    if (pipeline_) return;
    PipelineOptions opts;
    opts.engine = settings_.engine;
    opts.augmentation = settings_.augmentation;
    opts.geometry = settings_.geometry;
    opts.viewport = settings_.viewport;
    opts.record_latency = true;
    pipeline_.emplace(opts);
    pipeline_->set_drift_profile(installed_drift_);
    if (pending_layout_) {
        pipeline_->set_layout(*pending_layout_);
        pending_layout_.reset();
    }
}

void Session::emit_events(const std::vector<PipelineEvent>& events, std::vector<Json>& out) {
    for (const auto& ev : events) {
        if (const auto* f = std::get_if<Fixation>(&ev)) {
            metrics_input_.fixations.push_back(*f);
            if (settings_.debug_fixations) out.push_back(envelope("fixation_debug", to_json(*f)));
        } else if (const auto* b = std::get_if<BehaviorEvent>(&ev)) {
            metrics_input_.behaviors.push_back(*b);
            out.push_back(envelope("behavior", to_json(*b)));
        } else if (const auto* a = std::get_if<AugmentationEvent>(&ev)) {
            out.push_back(envelope("augment", to_json(*a)));
        }
    }
}

void Session::on_phase(const Json& payload, std::vector<Json>& out) {
    if (!payload.contains("phase") || !payload["phase"].is_string())
        throw Error(ErrorCode::parse, "phase message needs string 'phase'");
    const auto target = phase_from_string(payload["phase"].get<std::string>());
    if (!target) throw Error(ErrorCode::parse, "unknown phase '" + payload["phase"].get<std::string>() + "'");

    if (*target == Phase::ended) {
        finish_step(out);
        end_session(out);
        return;
    }

    const bool same = *target == phase_;
    const bool forward = phase_rank(*target) > phase_rank(phase_);
    const bool recustomize = phase_ == Phase::reading && *target == Phase::configuring;
    if (same && (phase_ == Phase::configuring || phase_ == Phase::reading)) return;
    if (!same && !forward && !recustomize)
        throw Error(ErrorCode::invalid_config,
                    std::string("cannot move from ") + to_string(phase_) + " to " + to_string(*target));

    std::optional<TargetKind> kind;
    if (*target == Phase::calibrating || *target == Phase::validating) {
        const std::string fallback = *target == Phase::calibrating ? "dots14" : "dots5";
        std::string step = fallback;
        if (auto it = payload.find("step"); it != payload.end()) {
            if (!it->is_string()) throw Error(ErrorCode::parse, "step must be a string");
            step = it->get<std::string>();
        }
        kind = target_kind_from_string(step);
        const bool ok = kind && (*target == Phase::calibrating ? (*kind == TargetKind::dots14 || *kind == TargetKind::lines5)
                                                               : (*kind == TargetKind::dots5 || *kind == TargetKind::lines4));
        if (!ok) throw Error(ErrorCode::invalid_config, "step '" + step + "' does not belong to " + to_string(*target));
    }
    if (*target == Phase::reading) {
        bool skip = false;
        if (auto it = payload.find("skip_calibration"); it != payload.end()) {
            if (!it->is_boolean()) throw Error(ErrorCode::parse, "skip_calibration must be a boolean");
            skip = it->get<bool>();
        }
        if (!calibration_validated_ && !skip && !reading_entered_)
            throw Error(ErrorCode::invalid_config, "reading needs a validated or explicitly skipped calibration");
    }

    finish_step(out);
    phase_ = *target;
    if (kind) {
        step_ = Step{*kind, {}};
        Json targets = to_json(make_target_layout(*kind), settings_.geometry);
        targets["phase"] = to_string(phase_);
        out.push_back(envelope("targets", std::move(targets)));
    }
    if (phase_ == Phase::reading) {
        reading_entered_ = true;
        ensure_pipeline();
    }
}

void Session::finish_step(std::vector<Json>& out) {
    if (!step_) return;
    Step step = std::move(*step_);
    step_.reset();
    const TargetLayout targets = make_target_layout(step.kind);

    auto eye_samples = [&](const std::vector<GazeSample>& in, std::optional<Eye> eye) {
        std::vector<GazeSample> kept;
        for (const auto& s : in)
            if (!eye || s.eye == *eye) kept.push_back(s);
        return kept;
    };
    auto recordings = [&]() {
        std::vector<SweepRecording> recs;
        for (std::size_t i = 0; i < targets.targets.size(); ++i) {
            SweepRecording rec;
            rec.y_px = targets.targets[i].y_frac * settings_.geometry.height_px;
            if (auto it = step.samples.find(static_cast<int>(i)); it != step.samples.end())
                rec.samples = eye_samples(it->second, selected_eye_);
            recs.push_back(std::move(rec));
        }
        return recs;
    };

    try {
        switch (step.kind) {
            case TargetKind::dots14: {
                std::size_t n = 0;
                for (const auto& [t, v] : step.samples) n += v.size();
                out.push_back(envelope("metrics", {{"scope", "calibration"}, {"kind", "dots14"}, {"sample_count", n}}));
                return;
            }
            case TargetKind::lines5: {
                fitted_drift_ = fit_drift_profile(recordings());
                out.push_back(envelope("metrics", {{"scope", "drift_fit"}, {"kind", "lines5"}, {"profile", to_json(*fitted_drift_)}}));
                return;
            }
            case TargetKind::dots5: {
                std::map<Eye, double> errors;
                Json per_eye = Json::object();
                std::string last_failure;
                for (char code : kEyes) {
                    const Eye eye = *eye_from_code(code);
                    std::vector<std::vector<GazeSample>> per_target(targets.targets.size());
                    bool any = false;
                    for (std::size_t i = 0; i < per_target.size(); ++i)
                        if (auto it = step.samples.find(static_cast<int>(i)); it != step.samples.end()) {
                            per_target[i] = eye_samples(it->second, eye);
                            any = any || !per_target[i].empty();
                        }
                    if (!any) continue;
                    try {
                        const auto r = score_dot_validation(per_target, targets, settings_.geometry);
                        errors[eye] = r.mean_error_deg;
                        per_eye[std::string(1, code)] = {{"mean_error_deg", r.mean_error_deg},
                                                         {"per_target_deg", r.per_target_deg},
                                                         {"data_loss", r.data_loss}};
                    } catch (const Error& e) {
                        last_failure = std::string(1, code) + ": " + e.what();
                    }
                }
                if (errors.empty())
                    throw Error(ErrorCode::under_sampled,
                                last_failure.empty() ? "no validation samples" : last_failure);
                selected_eye_ = select_eye(errors);
                calibration_validated_ = true;
                out.push_back(envelope("metrics", {{"scope", "dot_validation"},
                                                   {"per_eye", per_eye},
                                                   {"selected_eye", std::string(1, eye_code(*selected_eye_))}}));
                return;
            }
            case TargetKind::lines4: {
                const auto recs = recordings();
                const double raw = score_line_validation(recs);
                Json payload = {{"scope", "line_validation"}, {"raw_px", raw}};
                bool apply = false;
                if (fitted_drift_) {
                    const double corrected = score_line_validation(recs, &*fitted_drift_);
                    apply = decide_apply_correction(raw, corrected);
                    payload["corrected_px"] = corrected;
                } else {
                    payload["corrected_px"] = nullptr;
                }
                payload["apply"] = apply;
                installed_drift_ = apply ? fitted_drift_ : std::nullopt;
                if (pipeline_) pipeline_->set_drift_profile(installed_drift_);
                calibration_validated_ = true;
                out.push_back(envelope("metrics", std::move(payload)));
                return;
            }
        }
    } catch (const Error& e) {
        error(out, to_string(e.code()), e.what(), false, current_seq_);
    }
}

void Session::end_session(std::vector<Json>& out) {
    if (pipeline_) emit_events(pipeline_->flush(), out);
    if (!layouts_.empty()) {
        const PassageMetrics m = compute_metrics(metrics_input_, layouts_, nullptr, settings_.engine.scroll_pause_gap_us);
        Json payload = to_json(m);
        payload["scope"] = "passage";
        out.push_back(envelope("metrics", std::move(payload)));
    }
    phase_ = Phase::ended;
}

ReplayResult replay_session_log(std::string_view log_text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < log_text.size()) {
        std::size_t end = log_text.find('\n', start);
        if (end == std::string_view::npos) end = log_text.size();
        lines.push_back(log_text.substr(start, end - start));
        start = end + 1;
    }
    if (lines.empty()) throw ParseError(1, "empty session log");
    Json header;
    try {
        header = Json::parse(lines[0]);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, e.what());
    }
    if (!header.is_object() || header.value("log", "") != "gazeprompt-session")
        throw ParseError(1, "not a session log");
    if (header.value("version", 0) != 1)
        throw Error(ErrorCode::unsupported_format, "unsupported session log version");

    ReplayResult result;
    result.session_id = header.at("session").get<std::string>();
    result.settings = session_settings_from_json(header.at("settings"));
    Session session(result.session_id, result.settings);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        Json entry;
        try {
            entry = Json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(i + 1, e.what());
        }
        const std::string dir = entry.value("dir", "");
        if (dir == "in") {
            const std::string raw = entry.contains("raw_hex") ? from_hex(entry.at("raw_hex").get<std::string>(), i + 1)
                                                              : entry.at("raw").get<std::string>();
            for (const auto& m : session.handle_line(raw, entry.at("wall_us").get<Micros>()))
                result.replayed_outbound.push_back(dump_line(m));
        } else if (dir == "tick") {
            for (const auto& m : session.tick(entry.at("wall_us").get<Micros>()))
                result.replayed_outbound.push_back(dump_line(m));
        } else if (dir == "transport_error") {
            for (const auto& m : session.transport_error(entry.at("message").get<std::string>(),
                                                         entry.at("wall_us").get<Micros>()))
                result.replayed_outbound.push_back(dump_line(m));
        } else if (dir == "out") {
            result.recorded_outbound.push_back(dump_line(entry.at("msg")));
        } else {
            throw ParseError(i + 1, "unknown log entry direction '" + dir + "'");
        }
    }
    result.replayed_log = session.log().text();
    result.metrics_input = session.metrics_input();
    result.layouts = session.layouts();
    return result;
}

std::string make_message(const std::string& type, std::int64_t seq, const Json& payload, const std::string& session) {
    return Json{{"type", type}, {"session", session}, {"seq", seq}, {"payload", payload}}.dump();
}

Json layout_payload(const PageLayout& layout, double scroll_dy, const IdMap* line_map, const IdMap* word_map) {
    Json p = {{"layout", to_json(layout)}, {"scroll_dy", scroll_dy}};
    if (line_map) p["line_map"] = id_map_to_json(*line_map);
    if (word_map) p["word_map"] = id_map_to_json(*word_map);
    return p;
}

std::vector<ScheduledLayout> layout_schedule(const PageLayout& base, const GroundTruth& truth) {
    std::vector<ScheduledLayout> out;
    for (const auto& s : truth.scrolls) {
        ScheduledLayout ch;
        ch.before_t = s.scroll.t + 1;
        ch.layout = layout_at_version(base, truth, s.layout_version);
        ch.scroll_dy = s.scroll.dy;
        IdMap lines, words;
        for (const auto& l : ch.layout.lines) lines[l.line_id] = l.line_id;
        for (const auto& w : ch.layout.words) words[w.word_id] = w.word_id;
        ch.line_map = std::move(lines);
        ch.word_map = std::move(words);
        out.push_back(std::move(ch));
    }
    return out;
}

SessionLog run_session(GazeSource& source, const std::function<void(const Json&)>& sink, const RunOptions& options) {
    Session session(options.session_id, options.settings);
    std::int64_t seq = 0;
    Micros wall = 0;
    auto send = [&](const std::string& type, const Json& payload) {
        for (const auto& m : session.handle_line(make_message(type, ++seq, payload, options.session_id), wall))
            if (sink) sink(m);
    };

    send("hello", {{"client", "run_session"}});
    send("layout", layout_payload(options.layout));
    send("phase", {{"phase", "reading"}, {"skip_calibration", true}});
    std::size_t next_change = 0;
    while (!session.ended()) {
        const auto s = source.next();
        if (!s) break;
        wall = options.wall_clock ? options.wall_clock(*s) : s->t;
        while (next_change < options.layout_changes.size() && options.layout_changes[next_change].before_t <= s->t) {
            const auto& ch = options.layout_changes[next_change++];
            if (ch.scroll_dy != 0.0) send("scroll", {{"t", ch.before_t}, {"dy", ch.scroll_dy}});
            send("layout", layout_payload(ch.layout, ch.scroll_dy, ch.line_map ? &*ch.line_map : nullptr,
                                          ch.word_map ? &*ch.word_map : nullptr));
        }
        send("gaze", to_json(*s));
    }
    if (options.latencies_us) *options.latencies_us = session.latencies_us();
    if (!session.ended()) send("phase", {{"phase", "ended"}});
    return session.log();
}

}  // namespace gazeprompt
