#include <doctest.h>

#include <random>

#include "gazeprompt/error.hpp"
#include "gazeprompt/session.hpp"
#include "gazeprompt/simulator.hpp"
#include "support.hpp"

using namespace gazeprompt;

namespace {

struct Client {
    Session session;
    std::int64_t seq = 0;
    Micros wall = 0;
    Micros clock = 0;  // sample timestamps, strictly increasing across steps
    std::vector<Json> received;

    explicit Client(const SessionSettings& s = {}) : session("test", s) {}

    std::vector<Json> send(const std::string& type, const Json& payload) {
        wall += 1000;
        auto out = session.handle_line(make_message(type, ++seq, payload, "test"), wall);
        received.insert(received.end(), out.begin(), out.end());
        return out;
    }

    std::vector<Json> gaze(GazeSample s, std::optional<int> target = std::nullopt) {
        s.t = (clock += 8333);
        Json p = to_json(s);
        if (target) p["target"] = *target;
        return send("gaze", p);
    }

    void look_at_dots(TargetKind kind, double offset_px = 0.0) {
        const auto geom = ScreenGeometry::study_default();
        const TargetLayout t = make_target_layout(kind);
        for (std::size_t i = 0; i < t.targets.size(); ++i)
            for (int k = 0; k < 40; ++k) {
                GazeSample s;
                s.x = t.targets[i].x_frac * geom.width_px + offset_px;
                s.y = t.targets[i].y_frac * geom.height_px;
                gaze(s, static_cast<int>(i));
            }
    }

    void follow_sweeps(TargetKind kind, const ReaderProfile& p) {
        const auto recs = simulate_sweep_session(kind, p, ScreenGeometry::study_default());
        for (std::size_t i = 0; i < recs.size(); ++i)
            for (const auto& s : recs[i].samples) gaze(s, static_cast<int>(i));
    }
};

const Json* find_type(const std::vector<Json>& msgs, const std::string& type) {
    for (const auto& m : msgs)
        if (m["type"] == type) return &m;
    return nullptr;
}

const Json* find_metrics(const std::vector<Json>& msgs, const std::string& scope) {
    for (const auto& m : msgs)
        if (m["type"] == "metrics" && m["payload"].value("scope", "") == scope) return &m;
    return nullptr;
}

}  // namespace

TEST_CASE("calibration and validation flow") {
    Client c;
    c.send("hello", {{"client", "test"}});
    auto out = c.send("phase", {{"phase", "calibrating"}, {"step", "dots14"}});
    const Json* targets = find_type(out, "targets");
    REQUIRE(targets);
    CHECK((*targets)["payload"]["targets"].size() == 14);
    c.look_at_dots(TargetKind::dots14);

    out = c.send("phase", {{"phase", "calibrating"}, {"step", "lines5"}});
    REQUIRE(find_metrics(out, "calibration"));
    REQUIRE(find_type(out, "targets"));
    CHECK((*find_type(out, "targets"))["payload"]["sweeps"].size() == 5);
    ReaderProfile drifted;
    drifted.drift = {{0, 12}, {1200, 12}};
    drifted.noise_sd_px = 2;
    c.follow_sweeps(TargetKind::lines5, drifted);

    out = c.send("phase", {{"phase", "validating"}, {"step", "dots5"}});
    const Json* fit = find_metrics(out, "drift_fit");
    REQUIRE(fit);
    for (double o : (*fit)["payload"]["profile"]["per_line_offset"]) CHECK(o == doctest::Approx(12).epsilon(0.1));
    c.look_at_dots(TargetKind::dots5, 10.0);

    out = c.send("phase", {{"phase", "validating"}, {"step", "lines4"}});
    const Json* dots = find_metrics(out, "dot_validation");
    REQUIRE(dots);
    CHECK((*dots)["payload"]["selected_eye"] == "A");
    c.follow_sweeps(TargetKind::lines4, drifted);

    out = c.send("phase", {{"phase", "reading"}});
    const Json* lines = find_metrics(out, "line_validation");
    REQUIRE(lines);
    CHECK((*lines)["payload"]["apply"] == true);
    CHECK((*lines)["payload"]["raw_px"].get<double>() == doctest::Approx(12).epsilon(0.1));
    CHECK(c.session.phase() == Phase::reading);
    REQUIRE(c.session.installed_drift());
    REQUIRE(c.session.pipeline());
    CHECK(c.session.pipeline()->drift_profile());
}

TEST_CASE("reading requires calibration or an explicit skip") {
    Client c;
    auto out = c.send("phase", {{"phase", "reading"}});
    const Json* err = find_type(out, "error");
    REQUIRE(err);
    CHECK((*err)["payload"]["code"] == "invalid_config");
    CHECK((*err)["payload"]["fatal"] == false);
    CHECK((*err)["payload"]["in_reply_to"] == c.seq);
    c.send("phase", {{"phase", "reading"}, {"skip_calibration", true}});
    CHECK(c.session.phase() == Phase::reading);
    out = c.send("phase", {{"phase", "calibrating"}});
    CHECK(find_type(out, "error"));
    c.send("phase", {{"phase", "configuring"}});
    CHECK(c.session.phase() == Phase::configuring);
}

TEST_CASE("protocol errors") {
    SUBCASE("unknown type is not fatal") {
        Client c;
        auto out = c.send("wave", Json::object());
        REQUIRE(out.size() == 1);
        CHECK(out[0]["payload"]["code"] == "unknown_type");
        CHECK_FALSE(c.session.ended());
    }
    SUBCASE("seq must increase") {
        Client c;
        c.send("hello", Json::object());
        c.seq = 0;
        auto out = c.send("hello", Json::object());
        REQUIRE(out.size() == 1);
        CHECK(out[0]["payload"]["code"] == "protocol");
        CHECK(out[0]["payload"]["fatal"] == true);
        CHECK(c.session.ended());
        out = c.send("hello", Json::object());
        CHECK(out[0]["payload"]["code"] == "session_ended");
    }
    SUBCASE("gaze timestamps out of order end the session") {
        Client c;
        c.send("layout", layout_payload(gptest::ruled_layout(3)));
        c.send("phase", {{"phase", "reading"}, {"skip_calibration", true}});
        GazeSample s;
        s.x = 300;
        s.y = 125;
        s.t = 1000;
        c.send("gaze", to_json(s));
        auto out = c.send("gaze", to_json(s));
        const Json* err = find_type(out, "error");
        REQUIRE(err);
        CHECK((*err)["payload"]["code"] == "stream_order");
        CHECK((*err)["payload"]["fatal"] == true);
        CHECK(c.session.ended());
    }
    SUBCASE("malformed json") {
        Session s("x");
        auto out = s.handle_line("{\"type\": ", 1);
        REQUIRE(out.size() == 1);
        CHECK(out[0]["payload"]["code"] == "parse");
        CHECK_FALSE(s.ended());
    }
    SUBCASE("invalid layout is fatal") {
        Client c;
        PageLayout bad = gptest::ruled_layout(2);
        bad.lines[1].top = bad.lines[0].top;
        auto out = c.send("layout", layout_payload(bad));
        REQUIRE(find_type(out, "error"));
        CHECK((*find_type(out, "error"))["payload"]["code"] == "no_layout");
        CHECK(c.session.ended());
    }
}

TEST_CASE("every rejection is a structured error") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> byte(0, 255), len(0, 80), pick(0, 9);
    const std::vector<std::string> seeds = {
        make_message("hello", 1, {{"client", "x"}}),
        make_message("gaze", 2, {{"t", 5}, {"x", 1}, {"y", 2}}),
        make_message("phase", 3, {{"phase", "calibrating"}, {"step", "lines5"}}),
        make_message("layout", 4, layout_payload(gptest::ruled_layout(2))),
        make_message("configure", 5, {{"engine", {{"t_dw1", 3}}}}),
        make_message("scroll", 6, {{"t", 9}, {"dy", -20}}),
    };
    int errors = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        Session s("fuzz");
        std::int64_t wall = 0;
        for (int k = 0; k < 6; ++k) {
            std::string line;
            if (pick(rng) < 3) {
                const int n = len(rng);
                for (int i = 0; i < n; ++i) {
                    char ch = static_cast<char>(byte(rng));
                    line += ch == '\n' ? ' ' : ch;
                }
            } else {
                line = seeds[static_cast<std::size_t>(pick(rng)) % seeds.size()];
                const int edits = 1 + pick(rng) / 3;
                for (int e = 0; e < edits && !line.empty(); ++e) {
                    const std::size_t at = static_cast<std::size_t>(byte(rng)) % line.size();
                    const char ch = static_cast<char>(byte(rng));
                    line[at] = ch == '\n' ? '{' : ch;
                }
            }
            std::vector<Json> out;
            REQUIRE_NOTHROW(out = s.handle_line(line, wall += 100));
            for (const auto& m : out) {
                REQUIRE(m.is_object());
                REQUIRE(m["type"].is_string());
                REQUIRE(m["seq"].is_number_integer());
                REQUIRE(m["session"] == "fuzz");
                if (m["type"] == "error") {
                    ++errors;
                    CHECK(m["payload"]["code"].is_string());
                    CHECK(m["payload"]["message"].is_string());
                    CHECK(m["payload"]["fatal"].is_boolean());
                    CHECK(m["payload"].contains("in_reply_to"));
                }
            }
        }
        const ReplayResult r = replay_session_log(s.log().text());
        if (!r.identical()) {
            for (std::size_t q = 0; q < std::min(r.recorded_outbound.size(), r.replayed_outbound.size()); ++q)
                if (r.recorded_outbound[q] != r.replayed_outbound[q]) {
                    MESSAGE("rec " << r.recorded_outbound[q] << "\nrep " << r.replayed_outbound[q]);
                    break;
                }
            MESSAGE(r.recorded_outbound.size() << " vs " << r.replayed_outbound.size());
        }
        CHECK(r.identical());
    }
    CHECK(errors > 1000);
}

TEST_CASE("replay reproduces the outbound stream") {
    ReaderProfile p;
    p.noise_sd_px = 4;
    p.sweep_undershoot_lines = 0.2;
    p.scroll_every_lines = 4;
    p.seed = 3;
    const PageLayout l = gptest::passage_layout(12, 3);
    const Simulation sim = simulate(l, p);
    VectorSource src(sim.samples);
    RunOptions opt;
    opt.layout = l;
    opt.layout_changes = layout_schedule(l, sim.truth);
    std::vector<Json> sent;
    const SessionLog log = run_session(src, [&](const Json& m) { sent.push_back(m); }, opt);
    const ReplayResult r = replay_session_log(log.text());
    CHECK(r.identical());
    CHECK(r.replayed_outbound.size() == sent.size());
    CHECK(r.replayed_log == log.text());
    CHECK(find_metrics(sent, "passage"));
    CHECK_THROWS_AS(replay_session_log("{\"log\": \"other\"}\n"), ParseError);
}

TEST_CASE("augment events follow sweep landings") {
    ReaderProfile p;
    p.seed = 8;
    const PageLayout l = gptest::passage_layout(6, 8);
    const Simulation sim = simulate(l, p);
    VectorSource src(sim.samples);
    RunOptions opt;
    opt.layout = l;
    std::vector<Json> sent;
    run_session(src, [&](const Json& m) { sent.push_back(m); }, opt);
    std::size_t sweeps = 0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        if (sent[i]["type"] != "behavior" || sent[i]["payload"]["kind"] != "switch_return_sweep") continue;
        const Json& sweep = sent[i]["payload"];
        REQUIRE(sweeps < sim.truth.sweeps.size());
        CHECK(sweep["line_id"] == sim.truth.sweeps[sweeps].landed_line);
        CHECK(sweep["at"].get<Micros>() >= sim.truth.sweeps[sweeps].at);
        ++sweeps;
        // the old line is cleared, then the landing line highlighted at the landing time
        REQUIRE(i + 2 < sent.size());
        CHECK(sent[i + 1]["type"] == "augment");
        CHECK(sent[i + 1]["payload"]["kind"] == "clear_line");
        CHECK(sent[i + 1]["payload"]["line_id"] == sweep["from_line"]);
        CHECK(sent[i + 2]["type"] == "augment");
        CHECK(sent[i + 2]["payload"]["kind"] == "highlight_line");
        CHECK(sent[i + 2]["payload"]["line_id"] == sweep["line_id"]);
        CHECK(sent[i + 2]["payload"]["at"] == sweep["at"]);
    }
    CHECK(sweeps == sim.truth.sweeps.size());
    CHECK(sweeps == 5);
}

TEST_CASE("stalled source pauses the session") {
    SessionSettings st;
    st.stall_timeout_us = 2'000'000;
    Client c(st);
    c.send("layout", layout_payload(gptest::ruled_layout(3)));
    c.send("phase", {{"phase", "reading"}, {"skip_calibration", true}});
    GazeSample s;
    s.x = 300;
    s.y = 125;
    c.gaze(s);
    CHECK(c.session.tick(c.wall + 1'000'000).empty());
    auto out = c.session.tick(c.wall + 2'500'000);
    REQUIRE(out.size() == 1);
    CHECK(out[0]["payload"]["code"] == "source_stall");
    CHECK(out[0]["payload"]["fatal"] == false);
    CHECK(c.session.paused());
    CHECK(c.session.tick(c.wall + 5'000'000).empty());
    c.wall += 6'000'000;
    c.gaze(s);
    CHECK_FALSE(c.session.paused());
    const ReplayResult r = replay_session_log(c.session.log().text());
    CHECK(r.identical());
}

TEST_CASE("settings json") {
    const SessionSettings s = session_settings_from_json(Json{{"engine", {{"t_dw1", 6}}}, {"debug_fixations", false}});
    CHECK(s.engine.t_dw1 == 6);
    CHECK_FALSE(s.debug_fixations);
    CHECK_THROWS_AS(session_settings_from_json(Json{{"engines", Json::object()}}), Error);
    const SessionSettings back = session_settings_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
}
