#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace jam {

enum class Quality : std::uint8_t { maj, min, dim, aug, maj7, min7, dom7 };

inline constexpr int kQualityCount = 7;
inline constexpr int kSymbolCount = 12 * kQualityCount;  // 84

std::string_view quality_name(Quality q);
std::optional<Quality> parse_quality(std::string_view name);

/// Per-frame melody token: a new note, a sustained note, or silence.
class MelodyToken {
public:
    enum class Kind : std::uint8_t { rest, hold, onset };

    static constexpr MelodyToken rest() { return MelodyToken(Kind::rest, 0); }
    static constexpr MelodyToken hold() { return MelodyToken(Kind::hold, 0); }
    /// Throws std::invalid_argument for a pitch outside [0, 127].
    static MelodyToken onset(int pitch);

    constexpr Kind kind() const { return kind_; }
    constexpr bool is_onset() const { return kind_ == Kind::onset; }
    constexpr bool is_hold() const { return kind_ == Kind::hold; }
    constexpr bool is_rest() const { return kind_ == Kind::rest; }
    constexpr int pitch() const { return pitch_; }

    /// rest = 0, hold = 1, onset(p) = 2 + p.
    constexpr int ordinal() const {
        return kind_ == Kind::onset ? 2 + pitch_ : static_cast<int>(kind_);
    }

    constexpr bool operator==(const MelodyToken&) const = default;

private:
    constexpr MelodyToken(Kind k, int pitch) : kind_(k), pitch_(static_cast<std::uint8_t>(pitch)) {}
    Kind kind_;
    std::uint8_t pitch_;
};

/// Per-frame chord token: a chord symbol, a sustain of the previous state,
/// or explicit silence.
class ChordToken {
public:
    enum class Kind : std::uint8_t { no_chord, hold, symbol };

    static constexpr ChordToken no_chord() { return ChordToken(Kind::no_chord, 0, Quality::maj); }
    static constexpr ChordToken hold() { return ChordToken(Kind::hold, 0, Quality::maj); }
    /// Throws std::invalid_argument for a root outside [0, 11].
    static ChordToken symbol(int root, Quality q);
    /// Inverse of symbol_index(); index in [0, 84).
    static ChordToken from_symbol_index(int index);

    constexpr Kind kind() const { return kind_; }
    constexpr bool is_symbol() const { return kind_ == Kind::symbol; }
    constexpr bool is_hold() const { return kind_ == Kind::hold; }
    constexpr bool is_no_chord() const { return kind_ == Kind::no_chord; }
    constexpr int root() const { return root_; }
    constexpr Quality quality() const { return quality_; }

    /// root * 7 + quality, for symbols only.
    constexpr int symbol_index() const { return root_ * kQualityCount + static_cast<int>(quality_); }

    /// no_chord = 0, hold = 1, symbols 2..85 ordered by (root, quality).
    /// Sampling breaks argmax ties by the lowest ordinal.
    constexpr int ordinal() const {
        return kind_ == Kind::symbol ? 2 + symbol_index() : static_cast<int>(kind_);
    }

    constexpr bool operator==(const ChordToken&) const = default;

private:
    constexpr ChordToken(Kind k, int root, Quality q)
        : kind_(k), root_(static_cast<std::uint8_t>(root)), quality_(q) {}
    Kind kind_;
    std::uint8_t root_;
    Quality quality_;
};

/// One element of the interleaved melody/chord stream.
using Token = std::variant<MelodyToken, ChordToken>;

// Wire grammar: melody "R" | "H" | "N<pitch>"; chord "NC" | "H" | "<root>:<quality>".
std::string to_string(MelodyToken t);
std::string to_string(ChordToken t);
std::optional<MelodyToken> parse_melody_token(std::string_view s);
std::optional<ChordToken> parse_chord_token(std::string_view s);

}  // namespace jam
