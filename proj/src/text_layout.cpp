#include "gazeprompt/text_layout.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <random>
#include <sstream>

namespace gazeprompt {

namespace {

constexpr std::string_view kFunctionWords[] = {
    "a",     "an",     "the",    "and",   "or",    "but",   "nor",    "so",     "yet",   "if",
    "of",    "in",     "on",     "at",    "to",    "for",   "from",   "by",     "with",  "about",
    "into",  "onto",   "over",   "under", "up",    "down",  "out",    "off",    "near",  "after",
    "before", "around", "through", "between", "without", "than", "as", "i", "me", "my",
    "we",    "us",     "our",    "you",   "your",  "he",    "him",    "his",    "she",   "her",
    "it",    "its",    "they",   "them",  "their", "this",  "that",   "these",  "those", "who",
    "whom",  "which",  "what",   "is",    "am",    "are",   "was",    "were",   "be",    "been",
    "being", "have",   "has",    "had",   "do",    "does",  "did",    "will",   "would", "shall",
    "should", "can",   "could",  "may",   "might", "must",  "not",    "no",     "there", "then",
    "when",  "while",  "where",  "all",   "some",  "any",
};

std::string normalize(std::string_view word) {
    std::string out;
    for (char c : word)
        if (std::isalpha(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace

bool is_function_word(std::string_view word) {
    const std::string w = normalize(word);
    return std::find(std::begin(kFunctionWords), std::end(kFunctionWords), w) != std::end(kFunctionWords);
}

PageLayout build_layout(std::string_view text, const TextStyle& style, int layout_version) {
    PageLayout layout;
    layout.layout_version = layout_version;
    layout.background = style.background;

    std::istringstream in{std::string(text)};
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);

    const double char_w = style.font_px * style.char_width_em;
    const double pitch = style.font_px * style.line_spacing;
    const double max_right = style.left + style.text_width;

    LineId line = -1;
    double cursor = max_right + 1.0;  // forces a new line on the first word
    WordId next_id = 0;
    for (const auto& tok : tokens) {
        const double width = char_w * static_cast<double>(tok.size());
        if (line < 0 || cursor + char_w + width > max_right) {
            ++line;
            const double top = style.top + pitch * line;
            layout.lines.push_back({line, top, top + style.font_px, style.left, style.left});
            cursor = style.left - char_w;
        }
        const double left = cursor + char_w;
        WordBox w;
        w.word_id = next_id++;
        w.line_id = line;
        w.left = left;
        w.right = left + width;
        w.text = tok;
        w.function_word = is_function_word(tok);
        layout.words.push_back(std::move(w));
        layout.lines.back().right = left + width;
        cursor = left + width;
    }
    refresh_layout_metrics(layout);
    return layout;
}

std::string random_passage(std::size_t word_count, std::uint64_t seed) {
    static constexpr std::array<std::string_view, 48> content = {
        "reindeer",  "morning",   "village",  "lantern",   "winter",    "garden",
        "kitchen",   "harbor",    "traffic",  "children",  "quietly",   "whispered",
        "mountain",  "activities", "neighbor", "curious",  "painted",   "wandered",
        "library",   "umbrella",  "festival", "distance",  "gathered",  "shimmering",
        "road",      "busy",      "lived",    "watch",     "sit",       "outside",
        "river",     "bright",    "hurry",    "ancient",   "carefully", "remembered",
        "blanket",   "orchard",   "whistle",  "journey",   "explained", "afternoon",
        "yellow",    "sparrow",   "balcony",  "telescope", "cinnamon",  "photograph",
    };
    static constexpr std::array<std::string_view, 16> function = {
        "the", "a", "to", "of", "and", "in", "on", "with", "was", "she", "they", "at", "for", "from", "it", "by",
    };
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution pick_function(0.35);
    std::uniform_int_distribution<std::size_t> pick_content(0, content.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_fn(0, function.size() - 1);
    std::string out;
    for (std::size_t i = 0; i < word_count; ++i) {
        if (i) out.push_back(' ');
        out += pick_function(rng) ? function[pick_fn(rng)] : content[pick_content(rng)];
    }
    return out;
}

}  // namespace gazeprompt
