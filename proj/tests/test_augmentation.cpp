#include <doctest.h>

#include "gazeprompt/augmentation.hpp"
#include "gazeprompt/error.hpp"
#include "support.hpp"

using namespace gazeprompt;
using gptest::fix_at;
using gptest::ruled_layout;

namespace {

BehaviorEvent sweep_to(LineId line, Micros at = 0, int version = 0) {
    BehaviorEvent e;
    e.kind = BehaviorKind::switch_return_sweep;
    e.line_id = line;
    e.from_line = line - 1;
    e.at = at;
    e.layout_version = version;
    return e;
}

BehaviorEvent hard_word(WordId w, Micros at = 0) {
    BehaviorEvent e;
    e.kind = BehaviorKind::difficult_word;
    e.word_id = w;
    e.line_id = w;
    e.trigger = DwTrigger::first_fixation;
    e.at = at;
    return e;
}

}  // namespace

TEST_CASE("default colors") {
    AugmentationConfig c;
    CHECK(c.line_color() == kYellow);
    c.ls_mode = LineAugMode::arrow;
    CHECK(c.line_color() == kBlue);
    c.background = Background::dark;
    CHECK(c.line_color() == kYellow);
    c.ls_mode = LineAugMode::highlight;
    CHECK(c.line_color() == kBlue);
    c.ls_color = HslColor{120, 50};
    CHECK(c.line_color() == Rgb{0, 255, 0});
    CHECK(hsl_to_rgb(60, 100, 50) == kYellow);
    CHECK(hsl_to_rgb(240, 100, 50) == kBlue);
    CHECK(hsl_to_rgb(0, 100, 100) == Rgb{255, 255, 255});
    c.ls_color = HslColor{360, 50};
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("sweep moves the highlight") {
    const PageLayout l = ruled_layout(8);
    AugmentationController a;
    a.on_behavior(sweep_to(4), l);
    const auto ev = a.on_behavior(sweep_to(5, 1000), l);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].kind == AugKind::clear_line);
    CHECK(*ev[0].line_id == 4);
    CHECK(ev[1].kind == AugKind::highlight_line);
    CHECK(*ev[1].line_id == 5);
    CHECK(*ev[1].color == Rgb{255, 255, 0});
    CHECK(*a.active_line() == 5);
    // same line again is silent
    BehaviorEvent f = sweep_to(5, 2000);
    f.kind = BehaviorKind::following;
    CHECK(a.on_behavior(f, l).empty());
}

TEST_CASE("at most one line augmentation") {
    const PageLayout l = ruled_layout(8);
    AugmentationController a;
    std::optional<LineId> active;
    for (LineId k : {0, 3, 3, 1, 7, 2, 2, 6}) {
        for (const auto& e : a.on_behavior(sweep_to(k), l)) {
            if (e.kind == AugKind::clear_line) {
                CHECK(active == e.line_id);
                active.reset();
            } else {
                CHECK_FALSE(active);
                active = e.line_id;
            }
        }
    }
    CHECK(active == a.active_line());
}

TEST_CASE("magnifier placement and dismissal") {
    PageLayout l = gptest::ruled_layout(12, 50, 100, 60);
    Viewport vp;
    AugmentationController a({}, vp);
    const auto top = a.on_behavior(hard_word(0), l);  // line top 60 is inside the top quarter
    REQUIRE(top.size() == 1);
    CHECK(top[0].kind == AugKind::magnify_word);
    CHECK(*top[0].placement == Placement::below);
    const Rect b = *top[0].bounds;
    CHECK(b.top == l.lines[0].bottom);
    CHECK(b.bottom - b.top == doctest::Approx(50 * 4.0));

    SUBCASE("inside keeps it") { CHECK_FALSE(a.on_fixation_for_magnifier(fix_at(900, b.top + 20))); }
    SUBCASE("within the margin keeps it") {
        CHECK_FALSE(a.on_fixation_for_magnifier(fix_at(900, b.bottom + 10)));
    }
    SUBCASE("two lines below dismisses") {
        const auto d = a.on_fixation_for_magnifier(fix_at(900, b.bottom + 150));
        REQUIRE(d);
        CHECK(d->kind == AugKind::dismiss_magnifier);
        CHECK_FALSE(a.magnifier_active());
    }
    SUBCASE("lower word goes above") {
        const auto ev = a.on_behavior(hard_word(6), l);
        REQUIRE(ev.size() == 2);
        CHECK(ev[0].kind == AugKind::dismiss_magnifier);
        CHECK(*ev[1].placement == Placement::above);
        CHECK(ev[1].bounds->bottom == l.lines[6].top);
    }
}

TEST_CASE("speech debounce and disabled features") {
    const PageLayout l = ruled_layout(3);
    AugmentationConfig c;
    c.dw_mode = WordAugMode::tts;
    AugmentationController a(c);
    CHECK(a.on_behavior(hard_word(1, 0), l).size() == 1);
    CHECK(a.on_behavior(hard_word(1, 1'500'000), l).empty());
    CHECK(a.on_behavior(hard_word(1, 2'100'000), l).size() == 1);

    c.dw_mode = WordAugMode::off;
    c.ls_mode = LineAugMode::off;
    AugmentationController off(c);
    CHECK(off.on_behavior(hard_word(1), l).empty());
    CHECK(off.on_behavior(sweep_to(2), l).empty());
}

TEST_CASE("stale events are dropped") {
    const PageLayout l = ruled_layout(3);
    AugmentationController a;
    CHECK(a.on_behavior(sweep_to(1, 0, 7), l).empty());
    CHECK(a.dropped_stale() == 1);
}

TEST_CASE("layout change remaps the active line") {
    const PageLayout l = ruled_layout(6);
    AugmentationController a;
    a.on_behavior(sweep_to(3), l);
    a.on_behavior(hard_word(3), l);
    const PageLayout next = translate_layout(l, -75, 1);
    IdMap m;
    for (int k = 1; k < 6; ++k) m[k] = k - 1;
    const auto ev = a.on_layout_change(next, &m, 500);
    REQUIRE(ev.size() == 3);
    CHECK(ev[0].kind == AugKind::dismiss_magnifier);
    CHECK(ev[1].kind == AugKind::clear_line);
    CHECK(*ev[2].line_id == 2);
    CHECK(ev[2].layout_version == 1);

    IdMap identity;
    for (int k = 0; k < 6; ++k) identity[k] = k;
    CHECK(a.on_layout_change(translate_layout(next, 0, 2), &identity, 600).empty());
    const auto gone = a.on_layout_change(translate_layout(next, 0, 3), nullptr, 700);
    REQUIRE(gone.size() == 1);
    CHECK(gone[0].kind == AugKind::clear_line);
    CHECK_FALSE(a.active_line());
}

TEST_CASE("config change redraws or clears") {
    const PageLayout l = ruled_layout(3);
    AugmentationController a;
    a.on_behavior(sweep_to(1), l);
    AugmentationConfig c;
    c.ls_mode = LineAugMode::arrow;
    auto ev = a.set_config(c, 10);
    REQUIRE(ev.size() == 2);
    CHECK(ev[1].kind == AugKind::arrow_line);
    CHECK(*ev[1].color == kBlue);
    c.ls_mode = LineAugMode::off;
    ev = a.set_config(c, 20);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == AugKind::clear_line);
    CHECK_FALSE(a.active_line());
}
