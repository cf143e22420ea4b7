#include "jam/tokens.hpp"

#include <charconv>
#include <stdexcept>

namespace jam {
namespace {

constexpr std::array<std::string_view, kQualityCount> kQualityNames = {
    "maj", "min", "dim", "aug", "maj7", "min7", "dom7"};

// Strict decimal: no sign, no leading zeros, no trailing garbage.
std::optional<int> parse_decimal(std::string_view s) {
    if (s.empty() || s.size() > 3) return std::nullopt;
    if (s.size() > 1 && s.front() == '0') return std::nullopt;
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace

std::string_view quality_name(Quality q) { return kQualityNames[static_cast<std::size_t>(q)]; }

std::optional<Quality> parse_quality(std::string_view name) {
    for (std::size_t i = 0; i < kQualityNames.size(); ++i) {
        if (kQualityNames[i] == name) return static_cast<Quality>(i);
    }
    return std::nullopt;
}

MelodyToken MelodyToken::onset(int pitch) {
    if (pitch < 0 || pitch > 127) {
        throw std::invalid_argument("melody pitch out of range: " + std::to_string(pitch));
    }
    return MelodyToken(Kind::onset, pitch);
}

ChordToken ChordToken::symbol(int root, Quality q) {
    if (root < 0 || root > 11) {
        throw std::invalid_argument("chord root out of range: " + std::to_string(root));
    }
    return ChordToken(Kind::symbol, root, q);
}

ChordToken ChordToken::from_symbol_index(int index) {
    if (index < 0 || index >= kSymbolCount) {
        throw std::invalid_argument("chord symbol index out of range: " + std::to_string(index));
    }
    return symbol(index / kQualityCount, static_cast<Quality>(index % kQualityCount));
}

std::string to_string(MelodyToken t) {
    switch (t.kind()) {
        case MelodyToken::Kind::rest: return "R";
        case MelodyToken::Kind::hold: return "H";
        case MelodyToken::Kind::onset: return "N" + std::to_string(t.pitch());
    }
    return "?";
}

std::string to_string(ChordToken t) {
    switch (t.kind()) {
        case ChordToken::Kind::no_chord: return "NC";
        case ChordToken::Kind::hold: return "H";
        case ChordToken::Kind::symbol:
            return std::to_string(t.root()) + ":" + std::string(quality_name(t.quality()));
    }
    return "?";
}

std::optional<MelodyToken> parse_melody_token(std::string_view s) {
    if (s == "R") return MelodyToken::rest();
    if (s == "H") return MelodyToken::hold();
    if (s.size() >= 2 && s.front() == 'N') {
        auto pitch = parse_decimal(s.substr(1));
        if (pitch && *pitch >= 0 && *pitch <= 127) return MelodyToken::onset(*pitch);
    }
    return std::nullopt;
}

std::optional<ChordToken> parse_chord_token(std::string_view s) {
    if (s == "NC") return ChordToken::no_chord();
    if (s == "H") return ChordToken::hold();
    auto colon = s.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto root = parse_decimal(s.substr(0, colon));
    auto quality = parse_quality(s.substr(colon + 1));
    if (!root || *root < 0 || *root > 11 || !quality) return std::nullopt;
    return ChordToken::symbol(*root, *quality);
}

}  // namespace jam
