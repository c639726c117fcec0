#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "gazeprompt/types.hpp"

namespace gazeprompt {

// Approximate monospace typesetting used to produce layouts for fixtures, the CLI and
// the simulator. Real clients send measured boxes instead.
struct TextStyle {
    double font_px = 48.0;
    double char_width_em = 0.55;
    double line_spacing = 1.5;  // line pitch / box height
    double left = 60.0;
    double top = 60.0;
    double text_width = 1800.0;
    Background background = Background::light;
};

// Fixed English stopword list (articles, prepositions, pronouns, auxiliaries, conjunctions).
bool is_function_word(std::string_view word);

PageLayout build_layout(std::string_view text, const TextStyle& style = {}, int layout_version = 0);

// Deterministic pseudo-English passage of roughly word_count words.
std::string random_passage(std::size_t word_count, std::uint64_t seed);

}  // namespace gazeprompt
