#pragma once
// Brute-force reference implementations. Written from the rules directly and
// sharing no helpers with the library beyond the token types.

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "jam/codec.hpp"
#include "jam/tokens.hpp"

namespace oracle {

// Per-frame scan: for frame f, find the selected onset (earliest on_ms in
// the frame, list order on ties) of every frame <= f, take the latest one,
// and decide whether its note still sounds at the start of f.
inline std::vector<jam::MelodyToken> monophonize(const std::vector<jam::NoteEvent>& events, double start,
                                                 double frame_ms, std::int64_t upto) {
    auto frame_of = [&](double t) {
        auto f = static_cast<std::int64_t>(std::floor((t - start) / frame_ms));
        while (start + static_cast<double>(f + 1) * frame_ms <= t) ++f;
        while (start + static_cast<double>(f) * frame_ms > t) --f;
        return f;
    };
    auto selected_in = [&](std::int64_t f) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (frame_of(events[i].on_ms) != f) continue;
            if (!best || events[i].on_ms < events[*best].on_ms) best = i;
        }
        return best;
    };
    std::vector<jam::MelodyToken> out;
    for (std::int64_t f = 0; f < upto; ++f) {
        std::optional<std::size_t> latest;
        std::int64_t latest_frame = -1;
        for (std::int64_t g = f; g >= 0; --g) {
            if (auto s = selected_in(g)) {
                latest = s;
                latest_frame = g;
                break;
            }
        }
        if (!latest) {
            out.push_back(jam::MelodyToken::rest());
        } else if (latest_frame == f) {
            out.push_back(jam::MelodyToken::onset(events[*latest].pitch));
        } else {
            const auto& ev = events[*latest];
            const double frame_start = start + static_cast<double>(f) * frame_ms;
            const bool sounding = !ev.off_ms || *ev.off_ms > frame_start;
            out.push_back(sounding ? jam::MelodyToken::hold() : jam::MelodyToken::rest());
        }
    }
    return out;
}

// Interval templates, restated.
inline std::vector<int> intervals(int quality) {
    static const std::array<std::vector<int>, 7> table{{
        {0, 4, 7}, {0, 3, 7}, {0, 3, 6}, {0, 4, 8}, {0, 4, 7, 11}, {0, 3, 7, 10}, {0, 4, 7, 10}}};
    return table[static_cast<std::size_t>(quality)];
}

inline std::optional<int> sounding_at(const std::vector<jam::MelodyToken>& melody, std::size_t f) {
    for (std::size_t g = f + 1; g-- > 0;) {
        if (melody[g].is_rest()) return std::nullopt;
        if (melody[g].is_onset()) return melody[g].pitch();
    }
    return std::nullopt;
}

// Exhaustive search over all 84 symbols for one window. Ranking: compat,
// then root support, then lower root, then quality order.
inline jam::ChordToken best_chord(const std::vector<jam::MelodyToken>& melody, std::size_t begin, std::size_t end) {
    using Key = std::tuple<int, int, int, int>;
    std::optional<Key> best;
    jam::ChordToken winner = jam::ChordToken::no_chord();
    for (int root = 0; root < 12; ++root) {
        for (int q = 0; q < 7; ++q) {
            int compat = 0, support = 0;
            for (std::size_t f = begin; f < end; ++f) {
                const auto p = sounding_at(melody, f);
                if (!p) continue;
                const int pc = *p % 12;
                bool in = false;
                for (int i : intervals(q)) in = in || (root + i) % 12 == pc;
                compat += in ? 1 : -1;
                support += pc == root ? 1 : 0;
            }
            const Key key{compat, support, -root, -q};
            if (!best || key > *best) {
                best = key;
                winner = jam::ChordToken::symbol(root, static_cast<jam::Quality>(q));
            }
        }
    }
    return winner;
}

inline std::vector<jam::ChordToken> offline(const std::vector<jam::MelodyToken>& melody, std::size_t begin,
                                            std::size_t end) {
    std::vector<jam::ChordToken> out;
    for (std::size_t w = begin; w < end;) {
        const std::size_t w_end = std::min(end, (w / 4 + 1) * 4);
        bool any = false;
        for (std::size_t f = w; f < w_end; ++f) any = any || sounding_at(melody, f).has_value();
        out.push_back(any ? best_chord(melody, w, w_end) : jam::ChordToken::no_chord());
        for (std::size_t f = w + 1; f < w_end; ++f) out.push_back(jam::ChordToken::hold());
        w = w_end;
    }
    return out;
}

// Random generators shared by property tests and the acceptance gate.
inline std::vector<jam::MelodyToken> random_melody(std::mt19937_64& rng, std::size_t frames) {
    std::vector<jam::MelodyToken> m;
    std::uniform_int_distribution<int> kind(0, 2), pitch(36, 96);
    for (std::size_t f = 0; f < frames; ++f) {
        int k = kind(rng);
        if (k == 1 && (f == 0 || m.back().is_rest())) k = 2;
        m.push_back(k == 0 ? jam::MelodyToken::rest() : k == 1 ? jam::MelodyToken::hold()
                                                              : jam::MelodyToken::onset(pitch(rng)));
    }
    return m;
}

// Events on a coarse 1/8-frame time grid so that equal onsets and
// boundary-exact offs are common.
inline std::vector<jam::NoteEvent> random_events(std::mt19937_64& rng, double start, double frame_ms,
                                                 int frames) {
    std::uniform_int_distribution<int> count(0, 12), tick(0, frames * 8 - 1), len(1, 40), pitch(0, 127),
        open(0, 9);
    std::vector<jam::NoteEvent> events;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        jam::NoteEvent ev;
        ev.pitch = pitch(rng);
        const int on = tick(rng);
        ev.on_ms = start + on * frame_ms / 8.0;
        if (open(rng) != 0) ev.off_ms = start + (on + len(rng)) * frame_ms / 8.0;
        events.push_back(ev);
    }
    return events;
}

}  // namespace oracle
