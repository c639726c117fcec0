#include "gazeprompt/behavior.hpp"

#include <cmath>
#include <limits>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

namespace {

constexpr double kVoteTieEps = 1e-12;

}  // namespace

const char* to_string(BehaviorKind kind) {
    switch (kind) {
        case BehaviorKind::following: return "following";
        case BehaviorKind::switch_return_sweep: return "switch_return_sweep";
        case BehaviorKind::jump: return "jump";
        case BehaviorKind::difficult_word: return "difficult_word";
    }
    return "following";
}

const char* to_string(DwTrigger trigger) {
    switch (trigger) {
        case DwTrigger::first_fixation: return "DW0_first_fixation";
        case DwTrigger::refixations: return "DW1_refixations";
        case DwTrigger::total_duration: return "DW2_total";
    }
    return "DW0_first_fixation";
}

LineVote cast_vote(const Fixation& fix, const PageLayout& layout) {
    if (layout.lines.empty()) throw Error(ErrorCode::no_layout, "layout has no lines");
    const LineBox* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& line : layout.lines) {
        const double dist = std::abs(fix.cy - line.center());
        if (dist < best_dist || (dist == best_dist && line.line_id < best->line_id)) {
            best = &line;
            best_dist = dist;
        }
    }
    LineVote vote;
    vote.landing_line = best->line_id;
    vote.normalized_distance = (fix.cy - best->center()) / (0.5 * best->height());
    vote.weight = 1.0 / (1.0 + std::abs(vote.normalized_distance));
    return vote;
}

LineIdentification identify_line(std::span<const Fixation> fixations, const PageLayout& layout) {
    if (layout.lines.empty()) throw Error(ErrorCode::no_layout, "layout has no lines");
    if (fixations.empty()) throw Error(ErrorCode::no_layout, "line identification needs a fixation");
    LineIdentification result;
    std::map<LineId, std::size_t> last_vote_index;
    for (std::size_t i = 0; i < fixations.size(); ++i) {
        const LineVote v = cast_vote(fixations[i], layout);
        result.votes.push_back(v);
        result.totals[v.landing_line] += v.weight;
        last_vote_index[v.landing_line] = i;
    }
    std::optional<LineId> best;
    double best_total = 0.0;
    for (const auto& [line, total] : result.totals) {
        if (!best || total > best_total + kVoteTieEps) {
            best = line;
            best_total = total;
        } else if (std::abs(total - best_total) <= kVoteTieEps &&
                   last_vote_index[line] > last_vote_index[*best]) {
            best = line;
            best_total = std::max(best_total, total);
        }
    }
    result.line = *best;
    return result;
}

SweepCriteria check_return_sweep(const Fixation& prev, const Fixation& next,
                                 const PageLayout& layout, const EngineConfig& cfg) {
    SweepCriteria c;
    c.leftward_jump = prev.cx - next.cx > cfg.t_ls0_px;
    c.left_portion = next.cx < layout.text_left() + cfg.t_ls1_fraction * layout.text_width;
    c.line_apart = next.cy - prev.cy > layout.line_height;
    return c;
}

std::optional<BehaviorEvent> classify_transition(const Fixation* prev, const Fixation& next,
                                                 LineTracker& tracker, const PageLayout& layout,
                                                 const EngineConfig& cfg) {
    const int version = layout.layout_version;
    if (next.layout_version != version || (prev && prev->layout_version != version))
        throw Error(ErrorCode::stale_fixation,
                    "fixation refers to layout version " + std::to_string(next.layout_version) +
                        ", active version is " + std::to_string(version));

    auto make = [&](BehaviorKind kind, LineId line) {
        BehaviorEvent ev;
        ev.kind = kind;
        ev.line_id = line;
        ev.from_line = tracker.current_line;
        ev.at = next.onset;
        ev.layout_version = version;
        return ev;
    };

    if (prev && tracker.current_line && check_return_sweep(*prev, next, layout, cfg).all()) {
        tracker.window.clear();
        tracker.window.push_back(next);
        const LineId line = identify_line(std::span(&next, 1), layout).line;
        BehaviorEvent ev = make(BehaviorKind::switch_return_sweep, line);
        tracker.current_line = line;
        tracker.last_identified = line;
        tracker.pending_line.reset();
        tracker.pending_count = 0;
        return ev;
    }

    tracker.window.push_back(next);
    while (tracker.window.size() > static_cast<std::size_t>(cfg.vote_window))
        tracker.window.pop_front();
    const std::vector<Fixation> window(tracker.window.begin(), tracker.window.end());
    const LineId line = identify_line(window, layout).line;
    tracker.last_identified = line;

    if (!tracker.current_line) {
        BehaviorEvent ev = make(BehaviorKind::following, line);
        tracker.current_line = line;
        return ev;
    }
    if (line == *tracker.current_line) {
        tracker.pending_line.reset();
        tracker.pending_count = 0;
        return make(BehaviorKind::following, line);
    }
    if (tracker.pending_line == line) {
        ++tracker.pending_count;
    } else {
        tracker.pending_line = line;
        tracker.pending_count = 1;
    }
    if (tracker.pending_count >= cfg.jump_stability_count) {
        BehaviorEvent ev = make(BehaviorKind::jump, line);
        tracker.current_line = line;
        tracker.pending_line.reset();
        tracker.pending_count = 0;
        return ev;
    }
    return std::nullopt;
}

std::optional<WordId> assign_word(double cx, LineId line, const PageLayout& layout) {
    const auto words = layout.words_on_line(line);
    if (words.empty()) return std::nullopt;
    const WordBox* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const WordBox* w : words) {
        if (cx >= w->left && cx <= w->right) return w->word_id;
        const double dist = cx < w->left ? w->left - cx : cx - w->right;
        // words are ordered left to right, so strict < keeps the left word on ties
        if (dist < best_dist) {
            best = w;
            best_dist = dist;
        }
    }
    return best->word_id;
}

std::optional<BehaviorEvent> track_word_pass(const Fixation& fix, WordId word, LineId line,
                                             const PageLayout& layout, WordPass& pass,
                                             const EngineConfig& cfg) {
    if (pass.open && pass.word_id == word) {
        ++pass.refixation_count;
        pass.total_duration += fix.duration;
    } else {
        pass = WordPass{};
        pass.word_id = word;
        pass.first_fixation_duration = fix.duration;
        pass.total_duration = fix.duration;
        pass.open = true;
    }
    if (pass.fired) return std::nullopt;

    std::optional<DwTrigger> trigger;
    if (pass.first_fixation_duration > cfg.t_dw0_us)
        trigger = DwTrigger::first_fixation;
    else if (pass.refixation_count > cfg.t_dw1)
        trigger = DwTrigger::refixations;
    else if (pass.total_duration > cfg.t_dw2_us)
        trigger = DwTrigger::total_duration;
    if (!trigger) return std::nullopt;

    pass.fired = true;
    if (cfg.stopword_suppression) {
        const WordBox* w = layout.find_word(word);
        if (w && w->function_word) return std::nullopt;
    }
    BehaviorEvent ev;
    ev.kind = BehaviorKind::difficult_word;
    ev.line_id = line;
    ev.word_id = word;
    ev.trigger = trigger;
    ev.at = fix.onset;
    ev.layout_version = layout.layout_version;
    return ev;
}

BehaviorEngine::BehaviorEngine(const EngineConfig& cfg) : cfg_(cfg) {}

void BehaviorEngine::reset() {
    tracker_.reset();
    previous_.reset();
    pass_ = WordPass{};
}

std::vector<BehaviorEvent> BehaviorEngine::on_fixation(const Fixation& fix,
                                                       const PageLayout& layout) {
    if (layout.lines.empty()) throw Error(ErrorCode::no_layout, "no active layout");
    if (!layout_version_ || *layout_version_ != layout.layout_version) {
        // layout replaced without a change notification
        if (layout_version_) reset();
        layout_version_ = layout.layout_version;
    }

    std::vector<BehaviorEvent> events;
    const Fixation* prev = previous_ ? &*previous_ : nullptr;
    if (auto ev = classify_transition(prev, fix, tracker_, layout, cfg_)) events.push_back(*ev);
    previous_ = fix;

    const LineId line = *tracker_.last_identified;
    if (auto word = assign_word(fix.cx, line, layout)) {
        if (auto ev = track_word_pass(fix, *word, line, layout, pass_, cfg_)) events.push_back(*ev);
    }
    return events;
}

void BehaviorEngine::on_layout_change(const PageLayout& new_layout, double scroll_dy,
                                      const IdMap* line_map, const IdMap* word_map) {
    if (layout_version_ && new_layout.layout_version != *layout_version_ + 1)
        throw Error(ErrorCode::protocol, "layout version " +
                                             std::to_string(new_layout.layout_version) +
                                             " does not follow " + std::to_string(*layout_version_));
    layout_version_ = new_layout.layout_version;

    auto remap = [](const IdMap& map, int id) -> std::optional<int> {
        auto it = map.find(id);
        if (it == map.end()) return std::nullopt;
        return it->second;
    };

    if (line_map) {
        auto shift = [&](Fixation& f) {
            f.cy += scroll_dy;
            f.layout_version = new_layout.layout_version;
        };
        for (auto& f : tracker_.window) shift(f);
        if (previous_) shift(*previous_);
        if (tracker_.current_line) {
            tracker_.current_line = remap(*line_map, *tracker_.current_line);
            if (!tracker_.current_line) tracker_.reset();
        }
        if (tracker_.pending_line) {
            tracker_.pending_line = remap(*line_map, *tracker_.pending_line);
            if (!tracker_.pending_line) tracker_.pending_count = 0;
        }
        if (tracker_.last_identified)
            tracker_.last_identified = remap(*line_map, *tracker_.last_identified);
        if (!tracker_.current_line) previous_.reset();
    } else {
        tracker_.reset();
        previous_.reset();
    }

    if (pass_.open) {
        std::optional<WordId> mapped = word_map ? remap(*word_map, pass_.word_id) : std::nullopt;
        if (mapped)
            pass_.word_id = *mapped;
        else
            pass_ = WordPass{};
    }
}

}  // namespace gazeprompt
