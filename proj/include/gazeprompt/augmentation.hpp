#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gazeprompt/behavior.hpp"
#include "gazeprompt/types.hpp"

namespace gazeprompt {

enum class LineAugMode { highlight, arrow, off };
enum class WordAugMode { magnify, tts, off };

const char* to_string(LineAugMode mode);
const char* to_string(WordAugMode mode);
std::optional<LineAugMode> line_mode_from_string(const std::string& s);
std::optional<WordAugMode> word_mode_from_string(const std::string& s);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kYellow{255, 255, 0};
inline constexpr Rgb kBlue{0, 0, 255};

// Saturation is fixed at 100%; hue in degrees [0, 360), lightness in percent [0, 100].
struct HslColor {
    double hue = 60.0;
    double lightness = 50.0;
    static constexpr double saturation = 100.0;
};

Rgb hsl_to_rgb(double hue_deg, double saturation_pct, double lightness_pct);

struct Rect {
    double left = 0.0, top = 0.0, right = 0.0, bottom = 0.0;

    bool contains(double x, double y, double margin = 0.0) const {
        return x >= left - margin && x <= right + margin && y >= top - margin &&
               y <= bottom + margin;
    }
};

inline constexpr double kMagnifierHysteresisPx = 20.0;
inline constexpr double kMagnifierTopZone = 0.25;
inline constexpr Micros kSpeakDebounceUs = 2 * kMicrosPerSecond;

struct AugmentationConfig {
    LineAugMode ls_mode = LineAugMode::highlight;
    WordAugMode dw_mode = WordAugMode::magnify;
    std::optional<HslColor> ls_color;  // unset: per-background default
    double magnifier_scale = 4.0;
    Background background = Background::light;

    Rgb line_color() const;
    void validate() const;
};

struct Viewport {
    double top = 0.0;
    double height = 1200.0;
    double width = 1920.0;
};

enum class AugKind { highlight_line, arrow_line, magnify_word, speak_word, dismiss_magnifier, clear_line };
enum class Placement { above, below };

const char* to_string(AugKind kind);
const char* to_string(Placement placement);

struct AugmentationEvent {
    AugKind kind = AugKind::clear_line;
    std::optional<LineId> line_id;
    std::optional<WordId> word_id;
    std::optional<Placement> placement;
    std::optional<Rgb> color;
    std::optional<Rect> bounds;
    std::optional<std::string> text;
    Micros at = 0;
    int layout_version = 0;
};

// State machine from behavior events to render directives. At most one line
// augmentation and one magnifier are active at any time.
class AugmentationController {
public:
    explicit AugmentationController(const AugmentationConfig& cfg = {}, const Viewport& viewport = {});

    std::vector<AugmentationEvent> on_behavior(const BehaviorEvent& ev, const PageLayout& layout);
    std::optional<AugmentationEvent> on_fixation_for_magnifier(const Fixation& fix);

    // Remaps or clears the active line and dismisses the magnifier after a layout change.
    std::vector<AugmentationEvent> on_layout_change(const PageLayout& new_layout, const IdMap* line_map,
                                                    Micros at);
    // Applies a new configuration, clearing augmentations of features turned off.
    std::vector<AugmentationEvent> set_config(const AugmentationConfig& cfg, Micros at);
    void set_viewport(const Viewport& viewport) { viewport_ = viewport; }

    const AugmentationConfig& config() const { return cfg_; }
    std::optional<LineId> active_line() const { return active_line_; }
    bool magnifier_active() const { return magnifier_.has_value(); }
    std::optional<Rect> magnifier_bounds() const;
    std::size_t dropped_stale() const { return dropped_stale_; }

private:
    struct Magnifier {
        WordId word_id;
        Rect bounds;
        Rect source;
        int layout_version;
    };

    AugmentationEvent line_event(LineId line, Micros at, int version) const;
    std::optional<AugmentationEvent> dismiss(Micros at);

    AugmentationConfig cfg_;
    Viewport viewport_;
    std::optional<LineId> active_line_;
    int active_version_ = 0;
    std::optional<Magnifier> magnifier_;
    std::map<WordId, Micros> last_spoken_;
    std::size_t dropped_stale_ = 0;
};

}  // namespace gazeprompt
