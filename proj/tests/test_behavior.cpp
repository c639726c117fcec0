#include <doctest.h>

#include <cmath>
#include <random>

#include "gazeprompt/behavior.hpp"
#include "gazeprompt/error.hpp"
#include "support.hpp"

using namespace gazeprompt;
using gptest::fix_at;
using gptest::line_box;
using gptest::lines_layout;
using gptest::ruled_layout;

TEST_CASE("vote weights") {
    const PageLayout l = ruled_layout(3);  // centres 125, 200, 275; h = 50
    SUBCASE("centre") {
        const LineVote v = cast_vote(fix_at(500, 200), l);
        CHECK(v.landing_line == 1);
        CHECK(v.normalized_distance == 0.0);
        CHECK(v.weight == 1.0);
        const auto id = identify_line(std::vector<Fixation>{fix_at(500, 200)}, l);
        CHECK(id.line == 1);
    }
    SUBCASE("bottom edge") {
        const LineVote v = cast_vote(fix_at(500, 225), l);
        CHECK(v.landing_line == 1);
        CHECK(v.normalized_distance == 1.0);
        CHECK(v.weight == 0.5);
    }
    SUBCASE("midway between lines goes to the lower id") {
        CHECK(cast_vote(fix_at(500, 162.5), l).landing_line == 0);
    }
    SUBCASE("weight law") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> y(-200, 600);
        for (int i = 0; i < 1000; ++i) {
            const LineVote v = cast_vote(fix_at(500, y(rng)), l);
            CHECK(std::abs(v.weight * (1 + std::abs(v.normalized_distance)) - 1) <= 1e-12);
        }
    }
}

TEST_CASE("vote ties go to the most recent") {
    const PageLayout l = ruled_layout(3);
    // lines 0 and 2 each get weight 1
    const auto id = identify_line(std::vector<Fixation>{fix_at(500, 125), fix_at(500, 275)}, l);
    CHECK(id.line == 2);
    const auto id2 = identify_line(std::vector<Fixation>{fix_at(500, 275), fix_at(500, 125)}, l);
    CHECK(id2.line == 0);
    CHECK_THROWS_AS(identify_line(std::vector<Fixation>{fix_at(1, 1)}, PageLayout{}), Error);
}

TEST_CASE("identify_line is translation invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> y(0, 900), shift(-500, 500);
    for (int trial = 0; trial < 500; ++trial) {
        const PageLayout l = ruled_layout(8, 50, 75, 100);
        std::vector<Fixation> fx;
        for (int k = 0; k < 3; ++k) fx.push_back(fix_at(300 + 100 * k, y(rng)));
        const double dx = shift(rng), dy = shift(rng);
        PageLayout moved = l;
        for (auto& b : moved.lines) {
            b.top += dy;
            b.bottom += dy;
            b.left += dx;
            b.right += dx;
        }
        std::vector<Fixation> fm = fx;
        for (auto& f : fm) {
            f.cx += dx;
            f.cy += dy;
        }
        CHECK(identify_line(fx, l).line == identify_line(fm, moved).line);
    }
}

TEST_CASE("moving a fixation toward a line never lowers its total") {
    const PageLayout l = ruled_layout(6);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> y(50, 600);
    std::uniform_int_distribution<int> pick(0, 5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Fixation> fx = {fix_at(300, y(rng)), fix_at(400, y(rng)), fix_at(500, y(rng))};
        const LineId a = pick(rng);
        const double m = l.lines[a].center();
        const auto before = identify_line(fx, l).totals;
        fx[1].cy += (m - fx[1].cy) * 0.37;
        const auto after = identify_line(fx, l).totals;
        const double b = before.count(a) ? before.at(a) : 0.0;
        const double c = after.count(a) ? after.at(a) : 0.0;
        CHECK(c >= b - 1e-12);
    }
}

TEST_CASE("return sweep criteria") {
    // text starts at x=100 with width 1800, line boxes 50 px
    const PageLayout l = lines_layout({line_box(0, 275, 50), line_box(1, 337, 50)});
    const EngineConfig cfg;
    const SweepCriteria yes = check_return_sweep(fix_at(1500, 300), fix_at(200, 362), l, cfg);
    CHECK(yes.leftward_jump);
    CHECK(yes.left_portion);
    CHECK(yes.line_apart);
    CHECK(yes.all());
    const SweepCriteria no = check_return_sweep(fix_at(1500, 300), fix_at(1100, 362), l, cfg);
    CHECK_FALSE(no.leftward_jump);
    CHECK_FALSE(no.all());

    LineTracker tracker;
    Fixation a = fix_at(1500, 300), b = fix_at(200, 362, 300'000);
    CHECK(classify_transition(nullptr, a, tracker, l, cfg)->kind == BehaviorKind::following);
    const auto ev = classify_transition(&a, b, tracker, l, cfg);
    REQUIRE(ev);
    CHECK(ev->kind == BehaviorKind::switch_return_sweep);
    CHECK(ev->line_id == 1);
    CHECK(ev->from_line == 0);
    CHECK(tracker.window.size() == 1);
}

TEST_CASE("slow backward scan stays on the line") {
    const PageLayout l = ruled_layout(4);
    BehaviorEngine engine{EngineConfig{}};
    Micros t = 0;
    for (double x = 1800; x >= 150; x -= 110) {
        for (const auto& ev : engine.on_fixation(fix_at(x, 205, t), l)) {
            CHECK(ev.kind != BehaviorKind::switch_return_sweep);
            if (ev.kind != BehaviorKind::difficult_word) CHECK(ev.kind == BehaviorKind::following);
        }
        t += 250'000;
    }
}

TEST_CASE("jump needs a stable new line") {
    const PageLayout l = ruled_layout(6);
    EngineConfig cfg;
    BehaviorEngine engine(cfg);
    Micros t = 0;
    auto kinds = [&](double x, double y) {
        std::vector<BehaviorKind> out;
        for (const auto& e : engine.on_fixation(fix_at(x, y, t), l))
            if (e.kind != BehaviorKind::difficult_word) out.push_back(e.kind);
        t += 250'000;
        return out;
    };
    kinds(300, 125);
    kinds(500, 125);
    kinds(700, 125);
    // line 3 (centre 350): the window still votes line 0 once, then 3 stable ids
    CHECK(kinds(900, 350) == std::vector<BehaviorKind>{BehaviorKind::following});
    CHECK(kinds(1100, 350).empty());
    const auto third = kinds(1300, 350);
    CHECK(third.empty());
    const auto fourth = kinds(1500, 350);
    REQUIRE(fourth.size() == 1);
    CHECK(fourth[0] == BehaviorKind::jump);
    CHECK(*engine.tracker().current_line == 3);
}

TEST_CASE("difficult word triggers") {
    const PageLayout l = build_layout("Reindeer walked");
    const EngineConfig cfg;
    const WordBox& w = l.words[0];
    auto run = [&](std::vector<Micros> durations) {
        WordPass pass;
        std::vector<BehaviorEvent> out;
        Micros t = 0;
        for (Micros d : durations) {
            if (auto e = track_word_pass(fix_at(w.center(), 90, t, d), w.word_id, 0, l, pass, cfg)) out.push_back(*e);
            t += d + 40'000;
        }
        return out;
    };
    auto dw0 = run({600'000});
    REQUIRE(dw0.size() == 1);
    CHECK(*dw0[0].trigger == DwTrigger::first_fixation);
    auto dw1 = run(std::vector<Micros>(6, 200'000));
    REQUIRE(dw1.size() == 1);
    CHECK(*dw1[0].trigger == DwTrigger::refixations);
    CHECK(dw1[0].at == 5 * 240'000);
    auto dw2 = run({450'000, 450'000, 450'000, 450'000});
    REQUIRE(dw2.size() == 1);
    CHECK(*dw2[0].trigger == DwTrigger::total_duration);
    // fires once per pass
    CHECK(run(std::vector<Micros>(12, 600'000)).size() == 1);
    CHECK(run({300'000, 300'000, 300'000}).empty());
}

TEST_CASE("stopword suppression") {
    const PageLayout l = build_layout("the reindeer");
    EngineConfig cfg;
    cfg.stopword_suppression = true;
    WordPass pass;
    CHECK_FALSE(track_word_pass(fix_at(l.words[0].center(), 90, 0, 700'000), 0, 0, l, pass, cfg));
    CHECK(pass.fired);
    pass = {};
    CHECK(track_word_pass(fix_at(l.words[1].center(), 90, 0, 700'000), 1, 0, l, pass, cfg));
}

TEST_CASE("word assignment") {
    PageLayout l = ruled_layout(1);
    l.words = {{0, 0, 100, 300, "alpha", false}, {1, 0, 400, 600, "beta", false}};
    CHECK(*assign_word(200, 0, l) == 0);
    CHECK(*assign_word(350, 0, l) == 0);  // equidistant goes left
    CHECK(*assign_word(360, 0, l) == 1);
    CHECK(*assign_word(2000, 0, l) == 1);
    CHECK_FALSE(assign_word(200, 3, l));
}

TEST_CASE("scroll with a shifted line map") {
    const PageLayout l = ruled_layout(6);
    BehaviorEngine engine{EngineConfig{}};
    Micros t = 0;
    for (double x : {300.0, 500.0, 700.0}) {
        engine.on_fixation(fix_at(x, 275, t), l);
        t += 250'000;
    }
    REQUIRE(*engine.tracker().current_line == 2);
    engine.on_fixation(fix_at(l.words[2].center(), 275, t, 200'000), l);
    t += 250'000;
    // page scrolled up one pitch: old line k becomes line k-1
    PageLayout next = translate_layout(l, -75, 1);
    IdMap lines, words;
    for (int k = 1; k < 6; ++k) lines[k] = k - 1;
    for (const auto& w : l.words) words[w.word_id] = w.word_id;
    engine.on_layout_change(next, -75, &lines, &words);
    CHECK(*engine.tracker().current_line == 1);
    CHECK(engine.word_pass().open);
    CHECK(engine.tracker().window.back().cy == doctest::Approx(200));

    SUBCASE("no map resets") {
        engine.on_layout_change(translate_layout(next, 0, 2), 0, nullptr, nullptr);
        CHECK_FALSE(engine.tracker().current_line);
        CHECK_FALSE(engine.word_pass().open);
        const auto ev = engine.on_fixation(fix_at(500, 200, t, 200'000, 2), translate_layout(next, 0, 2));
        REQUIRE_FALSE(ev.empty());
        CHECK(ev[0].kind == BehaviorKind::following);
    }
    SUBCASE("version must follow") {
        CHECK_THROWS_AS(engine.on_layout_change(translate_layout(next, 0, 5), 0, nullptr, nullptr), Error);
    }
    SUBCASE("stale fixation") {
        LineTracker tracker;
        try {
            classify_transition(nullptr, fix_at(500, 200, t, 200'000, 0), tracker, next, EngineConfig{});
            FAIL("expected stale_fixation");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::stale_fixation);
        }
    }
}
