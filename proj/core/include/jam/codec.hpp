#pragma once

#include <bitset>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "jam/clock.hpp"
#include "jam/tokens.hpp"

namespace jam {

/// Raised for malformed codec input. index() is the offending position in
/// the input sequence when one applies.
class CodecError : public std::invalid_argument {
public:
    explicit CodecError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::invalid_argument(what), index_(index) {}
    std::optional<std::size_t> index() const { return index_; }

private:
    std::optional<std::size_t> index_;
};

/// A raw note from the user's instrument. An open note has no off time yet.
struct NoteEvent {
    int pitch = 60;
    Millis on_ms = 0.0;
    std::optional<Millis> off_ms;

    bool operator==(const NoteEvent&) const = default;
};

/// Parallel melody and chord token streams indexed by frame.
struct FrameGrid {
    std::vector<MelodyToken> melody;
    std::vector<ChordToken> chords;

    std::size_t frames() const { return melody.size(); }
    bool operator==(const FrameGrid&) const = default;
};

using PitchClassSet = std::bitset<12>;

/// Reduces raw input to at most one melody note per frame for frames
/// [0, upto). The earliest onset in a frame wins (list order breaks ties)
/// and every other onset in that frame is discarded. A selected note
/// produces HOLD for each later frame it still sounds into, until the next
/// selected onset truncates it.
std::vector<MelodyToken> monophonize(std::span<const NoteEvent> events, const FrameClock& clock,
                                     FrameIndex upto);

/// Per-frame stream: melody token then chord token, 2 * frames entries.
std::vector<Token> interleave(const FrameGrid& grid);

/// Inverse of interleave(). Throws CodecError carrying the index of the
/// first token whose kind breaks the melody/chord alternation.
FrameGrid deinterleave(std::span<const Token> seq);

/// Pitch classes of a chord symbol. Throws CodecError for HOLD/NO_CHORD.
PitchClassSet chord_pcs(ChordToken symbol);

/// Interval template of a quality, root first.
std::span<const int> quality_intervals(Quality q);

/// Root-position voicing with the root in [48, 59].
/// Throws CodecError for HOLD/NO_CHORD.
std::vector<int> voice_chord(ChordToken symbol);

/// Pitch actually sounding in each frame: an onset's pitch, carried through
/// following HOLDs. HOLD with no onset before it in the span yields nullopt.
std::vector<std::optional<int>> sounding_pitches(std::span<const MelodyToken> melody);

}  // namespace jam
