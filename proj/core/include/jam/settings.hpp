#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "jam/clock.hpp"

namespace jam {

/// User-adjustable session configuration. Defaults follow the baseline
/// jam: 8 beats of silence, 4 beats of lookahead, 4 beats committed.
struct SessionSettings {
    double bpm = 120.0;
    int beats_per_measure = 4;
    int silence_beats = 8;
    int lookahead_beats = 4;
    int commit_beats = 4;
    double temperature = 1.0;
    std::string model_id = "markov-online";
    bool metronome_on = true;
    bool show_incoming_chords = true;
    std::uint64_t seed = 0;

    FrameIndex silence_frames() const { return FrameIndex{silence_beats} * kFramesPerBeat; }
    FrameIndex lookahead_frames() const { return FrameIndex{lookahead_beats} * kFramesPerBeat; }
    FrameIndex commit_frames() const { return FrameIndex{commit_beats} * kFramesPerBeat; }

    /// Describes the first violated invariant, if any. Model ids are checked
    /// against an agent registry elsewhere.
    std::optional<std::string> validate() const;

    bool operator==(const SessionSettings&) const = default;
};

}  // namespace jam
