#include "gazeprompt/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

const char* to_string(LineAugMode mode) {
    switch (mode) {
        case LineAugMode::highlight: return "highlight";
        case LineAugMode::arrow: return "arrow";
        case LineAugMode::off: return "off";
    }
    return "off";
}

const char* to_string(WordAugMode mode) {
    switch (mode) {
        case WordAugMode::magnify: return "magnify";
        case WordAugMode::tts: return "tts";
        case WordAugMode::off: return "off";
    }
    return "off";
}

std::optional<LineAugMode> line_mode_from_string(const std::string& s) {
    if (s == "highlight") return LineAugMode::highlight;
    if (s == "arrow") return LineAugMode::arrow;
    if (s == "off") return LineAugMode::off;
    return std::nullopt;
}

std::optional<WordAugMode> word_mode_from_string(const std::string& s) {
    if (s == "magnify") return WordAugMode::magnify;
    if (s == "tts") return WordAugMode::tts;
    if (s == "off") return WordAugMode::off;
    return std::nullopt;
}

const char* to_string(AugKind kind) {
    switch (kind) {
        case AugKind::highlight_line: return "highlight_line";
        case AugKind::arrow_line: return "arrow_line";
        case AugKind::magnify_word: return "magnify_word";
        case AugKind::speak_word: return "speak_word";
        case AugKind::dismiss_magnifier: return "dismiss_magnifier";
        case AugKind::clear_line: return "clear_line";
    }
    return "clear_line";
}

const char* to_string(Placement placement) {
    return placement == Placement::above ? "above" : "below";
}

Rgb hsl_to_rgb(double hue_deg, double saturation_pct, double lightness_pct) {
    const double s = std::clamp(saturation_pct, 0.0, 100.0) / 100.0;
    const double l = std::clamp(lightness_pct, 0.0, 100.0) / 100.0;
    double h = std::fmod(hue_deg, 360.0);
    if (h < 0) h += 360.0;
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = l - c / 2.0;
    auto to8 = [m](double v) {
        return static_cast<std::uint8_t>(std::clamp(std::lround((v + m) * 255.0), 0L, 255L));
    };
    return {to8(r), to8(g), to8(b)};
}

Rgb AugmentationConfig::line_color() const {
    if (ls_color) return hsl_to_rgb(ls_color->hue, HslColor::saturation, ls_color->lightness);
    // highlight and arrow use opposite defaults; both swap on a dark page
    const bool yellow = (ls_mode == LineAugMode::arrow) == (background == Background::dark);
    return yellow ? kYellow : kBlue;
}

void AugmentationConfig::validate() const {
    if (ls_color) {
        if (!(ls_color->hue >= 0.0 && ls_color->hue < 360.0))
            throw Error(ErrorCode::invalid_config, "hue must be in [0, 360)");
        if (!(ls_color->lightness >= 0.0 && ls_color->lightness <= 100.0))
            throw Error(ErrorCode::invalid_config, "lightness must be in [0, 100]");
    }
    if (!(magnifier_scale >= 1.0))
        throw Error(ErrorCode::invalid_config, "magnifier_scale must be at least 1");
}

AugmentationController::AugmentationController(const AugmentationConfig& cfg, const Viewport& viewport)
    : cfg_(cfg), viewport_(viewport) {}

std::optional<Rect> AugmentationController::magnifier_bounds() const {
    if (!magnifier_) return std::nullopt;
    return magnifier_->bounds;
}

AugmentationEvent AugmentationController::line_event(LineId line, Micros at, int version) const {
    AugmentationEvent out;
    out.kind = cfg_.ls_mode == LineAugMode::arrow ? AugKind::arrow_line : AugKind::highlight_line;
    out.line_id = line;
    out.color = cfg_.line_color();
    out.at = at;
    out.layout_version = version;
    return out;
}

std::optional<AugmentationEvent> AugmentationController::dismiss(Micros at) {
    if (!magnifier_) return std::nullopt;
    AugmentationEvent out;
    out.kind = AugKind::dismiss_magnifier;
    out.word_id = magnifier_->word_id;
    out.at = at;
    out.layout_version = magnifier_->layout_version;
    magnifier_.reset();
    return out;
}

std::vector<AugmentationEvent> AugmentationController::on_behavior(const BehaviorEvent& ev,
                                                                   const PageLayout& layout) {
    std::vector<AugmentationEvent> out;
    if (ev.layout_version != layout.layout_version) {
        ++dropped_stale_;
        return out;
    }

    if (ev.kind != BehaviorKind::difficult_word) {
        if (cfg_.ls_mode == LineAugMode::off) return out;
        if (active_line_ == ev.line_id) return out;
        if (active_line_) {
            AugmentationEvent clear;
            clear.kind = AugKind::clear_line;
            clear.line_id = active_line_;
            clear.at = ev.at;
            clear.layout_version = ev.layout_version;
            out.push_back(clear);
        }
        out.push_back(line_event(ev.line_id, ev.at, ev.layout_version));
        active_line_ = ev.line_id;
        active_version_ = ev.layout_version;
        return out;
    }

    if (!ev.word_id) return out;
    const WordBox* word = layout.find_word(*ev.word_id);
    const LineBox* line = word ? layout.find_line(word->line_id) : nullptr;
    if (!word || !line) return out;

    if (cfg_.dw_mode == WordAugMode::tts) {
        auto it = last_spoken_.find(word->word_id);
        if (it != last_spoken_.end() && ev.at - it->second < kSpeakDebounceUs) return out;
        last_spoken_[word->word_id] = ev.at;
        AugmentationEvent speak;
        speak.kind = AugKind::speak_word;
        speak.word_id = word->word_id;
        speak.text = word->text;
        speak.at = ev.at;
        speak.layout_version = ev.layout_version;
        out.push_back(speak);
        return out;
    }
    if (cfg_.dw_mode != WordAugMode::magnify) return out;

    if (auto d = dismiss(ev.at)) out.push_back(*d);

    const bool near_top = (line->top - viewport_.top) < kMagnifierTopZone * viewport_.height;
    const Placement placement = near_top ? Placement::below : Placement::above;
    const double w = std::min(word->width() * cfg_.magnifier_scale, viewport_.width);
    const double h = line->height() * cfg_.magnifier_scale;
    Rect bounds;
    bounds.left = std::clamp(word->center() - w / 2.0, 0.0, std::max(0.0, viewport_.width - w));
    bounds.right = bounds.left + w;
    if (placement == Placement::above) {
        bounds.bottom = line->top;
        bounds.top = line->top - h;
    } else {
        bounds.top = line->bottom;
        bounds.bottom = line->bottom + h;
    }

    AugmentationEvent mag;
    mag.kind = AugKind::magnify_word;
    mag.word_id = word->word_id;
    mag.line_id = line->line_id;
    mag.placement = placement;
    mag.bounds = bounds;
    mag.text = word->text;
    mag.at = ev.at;
    mag.layout_version = ev.layout_version;
    out.push_back(mag);
    magnifier_ = Magnifier{word->word_id, bounds, Rect{word->left, line->top, word->right, line->bottom},
                           ev.layout_version};
    return out;
}

std::optional<AugmentationEvent> AugmentationController::on_fixation_for_magnifier(const Fixation& fix) {
    if (!magnifier_) return std::nullopt;
    if (magnifier_->bounds.contains(fix.cx, fix.cy, kMagnifierHysteresisPx) ||
        magnifier_->source.contains(fix.cx, fix.cy, kMagnifierHysteresisPx))
        return std::nullopt;
    return dismiss(fix.onset);
}

std::vector<AugmentationEvent> AugmentationController::on_layout_change(const PageLayout& new_layout,
                                                                        const IdMap* line_map,
                                                                        Micros at) {
    std::vector<AugmentationEvent> out;
    if (auto d = dismiss(at)) out.push_back(*d);
    if (!active_line_) return out;

    std::optional<LineId> mapped;
    if (line_map) {
        auto it = line_map->find(*active_line_);
        if (it != line_map->end() && new_layout.find_line(it->second)) mapped = it->second;
    }
    if (mapped == active_line_) {
        active_version_ = new_layout.layout_version;
        return out;
    }
    AugmentationEvent clear;
    clear.kind = AugKind::clear_line;
    clear.line_id = active_line_;
    clear.at = at;
    clear.layout_version = active_version_;
    out.push_back(clear);
    active_line_.reset();
    if (mapped) {
        out.push_back(line_event(*mapped, at, new_layout.layout_version));
        active_line_ = mapped;
        active_version_ = new_layout.layout_version;
    }
    return out;
}

std::vector<AugmentationEvent> AugmentationController::set_config(const AugmentationConfig& cfg,
                                                                  Micros at) {
    std::vector<AugmentationEvent> out;
    const AugmentationConfig old = cfg_;
    cfg_ = cfg;
    if (active_line_) {
        const bool changed = cfg.ls_mode != old.ls_mode || cfg.line_color() != old.line_color();
        if (changed) {
            AugmentationEvent clear;
            clear.kind = AugKind::clear_line;
            clear.line_id = active_line_;
            clear.at = at;
            clear.layout_version = active_version_;
            out.push_back(clear);
            if (cfg.ls_mode == LineAugMode::off)
                active_line_.reset();
            else
                out.push_back(line_event(*active_line_, at, active_version_));
        }
    }
    if (cfg.dw_mode != WordAugMode::magnify)
        if (auto d = dismiss(at)) out.push_back(*d);
    return out;
}

}  // namespace gazeprompt
