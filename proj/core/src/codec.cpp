#include "jam/codec.hpp"

#include <array>
#include <string>

namespace jam {
namespace {

constexpr std::array<int, 3> kMaj{0, 4, 7};
constexpr std::array<int, 3> kMin{0, 3, 7};
constexpr std::array<int, 3> kDim{0, 3, 6};
constexpr std::array<int, 3> kAug{0, 4, 8};
constexpr std::array<int, 4> kMaj7{0, 4, 7, 11};
constexpr std::array<int, 4> kMin7{0, 3, 7, 10};
constexpr std::array<int, 4> kDom7{0, 4, 7, 10};

constexpr int kVoicingBase = 48;

void require_symbol(ChordToken t, const char* op) {
    if (!t.is_symbol()) {
        throw CodecError(std::string(op) + ": expected a chord symbol, got " + to_string(t));
    }
}

}  // namespace

std::span<const int> quality_intervals(Quality q) {
    switch (q) {
        case Quality::maj: return kMaj;
        case Quality::min: return kMin;
        case Quality::dim: return kDim;
        case Quality::aug: return kAug;
        case Quality::maj7: return kMaj7;
        case Quality::min7: return kMin7;
        case Quality::dom7: return kDom7;
    }
    return {};
}

std::vector<MelodyToken> monophonize(std::span<const NoteEvent> events, const FrameClock& clock,
                                     FrameIndex upto) {
    if (upto < 0) throw CodecError("monophonize: negative frame count");

    // Winning event per frame.
    std::vector<const NoteEvent*> selected(static_cast<std::size_t>(upto), nullptr);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const NoteEvent& ev = events[i];
        if (ev.pitch < 0 || ev.pitch > 127) {
            throw CodecError("monophonize: pitch out of range", i);
        }
        if (ev.off_ms && *ev.off_ms <= ev.on_ms) {
            throw CodecError("monophonize: note released before it started", i);
        }
        if (ev.on_ms < clock.session_start()) {
            throw CodecError("monophonize: note precedes session start", i);
        }
        const FrameIndex f = clock.frame_at(ev.on_ms);
        if (f >= upto) continue;
        auto& slot = selected[static_cast<std::size_t>(f)];
        if (slot == nullptr || ev.on_ms < slot->on_ms) slot = &ev;
    }

    std::vector<MelodyToken> out;
    out.reserve(static_cast<std::size_t>(upto));
    const NoteEvent* current = nullptr;
    for (FrameIndex f = 0; f < upto; ++f) {
        if (const NoteEvent* ev = selected[static_cast<std::size_t>(f)]) {
            current = ev;
            out.push_back(MelodyToken::onset(ev->pitch));
        } else if (current != nullptr &&
                   (!current->off_ms || *current->off_ms > clock.time_of_frame(f))) {
            out.push_back(MelodyToken::hold());
        } else {
            current = nullptr;
            out.push_back(MelodyToken::rest());
        }
    }
    return out;
}

std::vector<Token> interleave(const FrameGrid& grid) {
    if (grid.melody.size() != grid.chords.size()) {
        throw CodecError("interleave: melody and chord streams differ in length");
    }
    std::vector<Token> seq;
    seq.reserve(grid.melody.size() * 2);
    for (std::size_t f = 0; f < grid.melody.size(); ++f) {
        seq.emplace_back(grid.melody[f]);
        seq.emplace_back(grid.chords[f]);
    }
    return seq;
}

FrameGrid deinterleave(std::span<const Token> seq) {
    FrameGrid grid;
    grid.melody.reserve(seq.size() / 2);
    grid.chords.reserve(seq.size() / 2);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i % 2 == 0) {
            const auto* m = std::get_if<MelodyToken>(&seq[i]);
            if (m == nullptr) throw CodecError("deinterleave: expected melody token", i);
            grid.melody.push_back(*m);
        } else {
            const auto* c = std::get_if<ChordToken>(&seq[i]);
            if (c == nullptr) throw CodecError("deinterleave: expected chord token", i);
            grid.chords.push_back(*c);
        }
    }
    if (seq.size() % 2 != 0) {
        throw CodecError("deinterleave: sequence ends mid-frame", seq.size());
    }
    return grid;
}

PitchClassSet chord_pcs(ChordToken symbol) {
    require_symbol(symbol, "chord_pcs");
    PitchClassSet pcs;
    for (int interval : quality_intervals(symbol.quality())) {
        pcs.set(static_cast<std::size_t>((symbol.root() + interval) % 12));
    }
    return pcs;
}

std::vector<int> voice_chord(ChordToken symbol) {
    require_symbol(symbol, "voice_chord");
    std::vector<int> pitches;
    const int root = kVoicingBase + symbol.root();
    for (int interval : quality_intervals(symbol.quality())) pitches.push_back(root + interval);
    return pitches;
}

std::vector<std::optional<int>> sounding_pitches(std::span<const MelodyToken> melody) {
    std::vector<std::optional<int>> out;
    out.reserve(melody.size());
    std::optional<int> current;
    for (const MelodyToken& t : melody) {
        if (t.is_onset()) {
            current = t.pitch();
        } else if (t.is_rest()) {
            current.reset();
        }
        out.push_back(current);
    }
    return out;
}

}  // namespace jam
