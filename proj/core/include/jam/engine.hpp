#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jam/clock.hpp"
#include "jam/codec.hpp"
#include "jam/record.hpp"
#include "jam/settings.hpp"
#include "jam/wire.hpp"

namespace jam {

enum class Phase { idle, silence, live, stopped };

std::string_view phase_name(Phase p);

/// Boundary to the audio/UI layer. Frame-aligned kinds are due exactly at
/// time_of_frame(frame).
struct EmittedEvent {
    enum class Kind { chord_on, chord_off, note_echo, metronome_tick };
    Kind kind = Kind::chord_on;
    std::vector<int> pitches;
    FrameIndex frame = 0;
    Millis due = 0.0;
    bool accent = false;   // metronome: first beat of a measure
    bool note_on = true;   // note_echo only

    bool operator==(const EmittedEvent&) const = default;
};

struct ScheduledChord {
    ChordToken token = ChordToken::no_chord();
    std::vector<int> voicing;
    bool operator==(const ScheduledChord&) const = default;
};

/// Client-side session state machine.
///
/// Owns the canonical history and the chord schedule. Every entry point
/// first catches playback up to `now`, so callers may interleave input,
/// responses and playback in any order as long as `now` never decreases.
/// Not thread-safe: drive it from a single event queue.
class SessionEngine {
public:
    explicit SessionEngine(SessionSettings settings, std::string session_id = "session");

    /// First note-on starts the session with that note in frame 0.
    /// A note-off with no sounding note is logged and ignored.
    void on_user_note(int pitch, bool on, Millis now);

    /// Applies from the next request on. Changing bpm after the session
    /// started throws std::logic_error.
    void update_settings(const SessionSettings& settings);

    /// True when a request may go out: session running, none in flight, and
    /// the next target frame has advanced past the last one requested.
    bool request_ready(Millis now) const;

    /// Request for frame_at(now) + 1 carrying the full history. Throws
    /// std::logic_error if !request_ready(now).
    JamRequest build_request(Millis now);

    /// Cancels every scheduled chord after the current frame and schedules
    /// the response in its place. Frames inside the committed horizon keep
    /// their committed chord. Stale responses are logged and discarded.
    /// Returns the next request when one is ready.
    std::optional<JamRequest> apply_response(const JamResponse& resp, Millis now);

    /// The in-flight request failed (error reply or transport loss).
    void abandon_request(Millis now);

    /// Plays every frame due by `now` and drains pending events.
    std::vector<EmittedEvent> play_due(Millis now);

    void stop(Millis now);

    /// Throws std::logic_error unless stopped.
    SessionRecord export_session() const;

    Phase phase() const { return phase_; }
    const SessionSettings& settings() const { return settings_; }
    const std::optional<FrameClock>& clock() const { return clock_; }
    const std::vector<NoteEvent>& melody_events() const { return events_; }
    const std::vector<ChordToken>& played_chords() const { return played_; }
    const std::map<FrameIndex, ScheduledChord>& pending() const { return pending_; }
    FrameIndex committed_horizon() const { return committed_horizon_; }
    const std::optional<WarmStart>& warm_start() const { return warm_start_; }
    std::size_t underruns() const { return underrun_frames_.size(); }
    const std::vector<FrameIndex>& underrun_frames() const { return underrun_frames_; }
    bool in_flight() const { return in_flight_.has_value(); }
    /// Uncommitted planned chords that a later response changed.
    std::size_t plan_changes() const { return plan_changes_; }
    const std::vector<std::string>& log() const { return log_; }

private:
    struct InFlight {
        FrameIndex target_frame;
        FrameIndex commit_frames;
        std::size_t log_index;
    };

    void advance(Millis now);
    void play_frame(FrameIndex f);
    void emit(EmittedEvent::Kind kind, std::vector<int> pitches, FrameIndex f, Millis due);
    FrameIndex next_target(Millis now) const;

    std::string session_id_;
    SessionSettings settings_;
    std::optional<FrameClock> clock_;
    Phase phase_ = Phase::idle;

    std::vector<NoteEvent> events_;
    std::map<int, std::size_t> open_notes_;

    std::vector<ChordToken> played_;  // frames [0, played_.size()) have elapsed
    std::map<FrameIndex, ScheduledChord> pending_;
    std::vector<int> sounding_;
    FrameIndex committed_horizon_ = 0;
    std::optional<WarmStart> warm_start_;

    std::optional<InFlight> in_flight_;
    FrameIndex last_requested_target_ = -1;
    FrameIndex last_applied_target_ = -1;

    std::vector<SettingsSpan> spans_;
    std::vector<RequestLogEntry> requests_;
    std::vector<FrameIndex> underrun_frames_;
    std::size_t plan_changes_ = 0;
    std::vector<EmittedEvent> outbox_;
    std::vector<std::string> log_;
    std::vector<MelodyToken> final_melody_;
};

}  // namespace jam
