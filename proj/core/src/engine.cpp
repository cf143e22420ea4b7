#include "jam/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace jam {

std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::idle: return "idle";
        case Phase::silence: return "silence";
        case Phase::live: return "live";
        case Phase::stopped: return "stopped";
    }
    return "?";
}

SessionEngine::SessionEngine(SessionSettings settings, std::string session_id)
    : session_id_(std::move(session_id)), settings_(std::move(settings)) {
    if (auto problem = settings_.validate()) throw std::invalid_argument(*problem);
    spans_.push_back(SettingsSpan{0, 0, settings_});
}

void SessionEngine::on_user_note(int pitch, bool on, Millis now) {
    if (phase_ == Phase::stopped) throw std::logic_error("note after the session stopped");
    if (pitch < 0 || pitch > 127) throw std::invalid_argument("note pitch out of range");

    if (phase_ == Phase::idle) {
        if (!on) {
            log_.push_back("ignored note-off before the session started");
            return;
        }
        clock_.emplace(settings_.bpm, now);
        phase_ = settings_.silence_frames() > 0 ? Phase::silence : Phase::live;
        spans_.front().settings = settings_;
    }
    advance(now);

    const FrameIndex frame = clock_->frame_at(now);
    auto release = [&](std::size_t index) {
        NoteEvent& ev = events_[index];
        ev.off_ms = now > ev.on_ms ? now : std::nextafter(ev.on_ms, std::numeric_limits<double>::infinity());
    };

    if (on) {
        if (auto it = open_notes_.find(pitch); it != open_notes_.end()) release(it->second);
        events_.push_back(NoteEvent{pitch, now, std::nullopt});
        open_notes_[pitch] = events_.size() - 1;
    } else {
        auto it = open_notes_.find(pitch);
        if (it == open_notes_.end()) {
            log_.push_back("ignored note-off for pitch " + std::to_string(pitch) + " with no sounding note");
            return;
        }
        release(it->second);
        open_notes_.erase(it);
    }
    EmittedEvent echo;
    echo.kind = EmittedEvent::Kind::note_echo;
    echo.pitches = {pitch};
    echo.frame = frame;
    echo.due = now;
    echo.note_on = on;
    outbox_.push_back(std::move(echo));
}

void SessionEngine::update_settings(const SessionSettings& settings) {
    if (auto problem = settings.validate()) throw std::invalid_argument(*problem);
    if (clock_ && settings.bpm != settings_.bpm) {
        throw std::logic_error("bpm cannot change once the session has started");
    }
    settings_ = settings;
}

FrameIndex SessionEngine::next_target(Millis now) const { return clock_->frame_at(now) + 1; }

bool SessionEngine::request_ready(Millis now) const {
    if (phase_ != Phase::silence && phase_ != Phase::live) return false;
    if (in_flight_) return false;
    return next_target(now) > last_requested_target_;
}

JamRequest SessionEngine::build_request(Millis now) {
    if (!request_ready(now)) throw std::logic_error("no request can be sent now");
    advance(now);

    const FrameIndex target = next_target(now);
    JamRequest req;
    req.session_id = session_id_;
    req.target_frame = target;
    req.settings = settings_;
    req.melody = monophonize(events_, *clock_, target);
    req.chords = played_;
    if (warm_start_) {
        // Warm-start chords stand in for frames where nothing was played.
        for (std::size_t i = 0; i < warm_start_->chords.size(); ++i) {
            const auto f = static_cast<std::size_t>(warm_start_->start_frame) + i;
            if (f < req.chords.size() && req.chords[f].is_no_chord()) req.chords[f] = warm_start_->chords[i];
        }
    }
    const FrameIndex commit_end = target + settings_.commit_frames();
    for (FrameIndex f = target; f < commit_end; ++f) {
        auto it = pending_.find(f);
        if (it == pending_.end()) break;
        req.committed.push_back(CommittedChord{f, it->second.token});
    }

    if (spans_.back().settings != settings_) {
        spans_.back().to_frame = target;
        spans_.push_back(SettingsSpan{target, target, settings_});
    }
    in_flight_ = InFlight{target, settings_.commit_frames(), requests_.size()};
    requests_.push_back(RequestLogEntry{target, now, std::nullopt, 0.0});
    last_requested_target_ = target;
    return req;
}

std::optional<JamRequest> SessionEngine::apply_response(const JamResponse& resp, Millis now) {
    if (phase_ != Phase::silence && phase_ != Phase::live) {
        log_.push_back("response for target " + std::to_string(resp.target_frame) + " outside a live session");
        return std::nullopt;
    }
    advance(now);
    if (resp.target_frame < last_applied_target_) {
        log_.push_back("discarded stale response for target " + std::to_string(resp.target_frame));
        return std::nullopt;
    }

    FrameIndex commit_frames = settings_.commit_frames();
    if (in_flight_ && in_flight_->target_frame == resp.target_frame) {
        commit_frames = in_flight_->commit_frames;
        requests_[in_flight_->log_index].recv_ms = now;
        requests_[in_flight_->log_index].gen_ms = resp.gen_ms;
        in_flight_.reset();
    }

    const FrameIndex current = clock_->frame_at(now);
    const FrameIndex old_horizon = committed_horizon_;
    auto voicing_at = [&](std::size_t i) {
        if (i < resp.voicings.size()) return resp.voicings[i];
        return resp.chords[i].is_symbol() ? voice_chord(resp.chords[i]) : std::vector<int>{};
    };

    for (std::size_t i = static_cast<std::size_t>(commit_frames); i < resp.chords.size(); ++i) {
        const FrameIndex f = resp.target_frame + static_cast<FrameIndex>(i);
        if (f <= current || f < old_horizon) continue;
        auto it = pending_.find(f);
        if (it != pending_.end() && it->second.token != resp.chords[i]) ++plan_changes_;
    }

    // Cancel everything after the current frame except committed chords.
    for (auto it = pending_.upper_bound(current); it != pending_.end();) {
        it = it->first >= old_horizon ? pending_.erase(it) : std::next(it);
    }
    for (std::size_t i = 0; i < resp.chords.size(); ++i) {
        const FrameIndex f = resp.target_frame + static_cast<FrameIndex>(i);
        if (f <= current || pending_.contains(f)) continue;
        pending_.emplace(f, ScheduledChord{resp.chords[i], voicing_at(i)});
    }

    committed_horizon_ = std::max(old_horizon, resp.target_frame + commit_frames);
    if (resp.warm_start) warm_start_ = resp.warm_start;
    last_applied_target_ = resp.target_frame;

    if (request_ready(now)) return build_request(now);
    return std::nullopt;
}

void SessionEngine::abandon_request(Millis now) {
    if (!in_flight_) return;
    advance(now);
    log_.push_back("abandoned request for target " + std::to_string(in_flight_->target_frame));
    in_flight_.reset();
}

std::vector<EmittedEvent> SessionEngine::play_due(Millis now) {
    advance(now);
    return std::exchange(outbox_, {});
}

void SessionEngine::stop(Millis now) {
    if (phase_ == Phase::stopped) return;
    if (phase_ != Phase::idle) {
        advance(now);
        for (const auto& [pitch, index] : open_notes_) {
            NoteEvent& ev = events_[index];
            ev.off_ms = now > ev.on_ms ? now : std::nextafter(ev.on_ms, std::numeric_limits<double>::infinity());
        }
        open_notes_.clear();
        final_melody_ = monophonize(events_, *clock_, static_cast<FrameIndex>(played_.size()));
        if (!sounding_.empty()) {
            emit(EmittedEvent::Kind::chord_off, std::exchange(sounding_, {}), clock_->frame_at(now), now);
        }
    }
    spans_.back().to_frame = static_cast<FrameIndex>(played_.size());
    pending_.clear();
    in_flight_.reset();
    phase_ = Phase::stopped;
}

SessionRecord SessionEngine::export_session() const {
    if (phase_ != Phase::stopped) throw std::logic_error("export requires a stopped session");
    SessionRecord record;
    record.session_id = session_id_;
    record.session_start = clock_ ? clock_->session_start() : 0.0;
    record.settings = spans_;
    record.melody = final_melody_;
    record.chords = played_;
    record.warm_start = warm_start_;
    record.requests = requests_;
    record.underruns = underrun_frames_;
    return record;
}

void SessionEngine::advance(Millis now) {
    if (!clock_ || phase_ == Phase::stopped || phase_ == Phase::idle) return;
    const FrameIndex last = clock_->frame_at(now);
    for (auto f = static_cast<FrameIndex>(played_.size()); f <= last; ++f) play_frame(f);
}

void SessionEngine::emit(EmittedEvent::Kind kind, std::vector<int> pitches, FrameIndex f, Millis due) {
    EmittedEvent ev;
    ev.kind = kind;
    ev.pitches = std::move(pitches);
    ev.frame = f;
    ev.due = due;
    outbox_.push_back(std::move(ev));
}

void SessionEngine::play_frame(FrameIndex f) {
    const FrameIndex silence = settings_.silence_frames();
    if (phase_ == Phase::silence && f >= silence) phase_ = Phase::live;
    const Millis due = clock_->time_of_frame(f);

    ChordToken played = ChordToken::no_chord();
    if (auto it = pending_.find(f); it != pending_.end()) {
        played = it->second.token;
        if (played.is_symbol()) {
            if (!sounding_.empty()) emit(EmittedEvent::Kind::chord_off, std::exchange(sounding_, {}), f, due);
            sounding_ = it->second.voicing;
            emit(EmittedEvent::Kind::chord_on, sounding_, f, due);
        } else if (played.is_no_chord() && !sounding_.empty()) {
            emit(EmittedEvent::Kind::chord_off, std::exchange(sounding_, {}), f, due);
        }
        pending_.erase(it);
    } else if (phase_ == Phase::live && f >= silence && f > 0) {
        // Underrun: keep whatever is sounding and count the miss. Frame 0
        // can never be requested, so it is exempt.
        underrun_frames_.push_back(f);
        played = ChordToken::hold();
    }
    played_.push_back(played);

    if (settings_.metronome_on && f % kFramesPerBeat == 0) {
        EmittedEvent tick;
        tick.kind = EmittedEvent::Kind::metronome_tick;
        tick.frame = f;
        tick.due = due;
        tick.accent = f % (FrameIndex{kFramesPerBeat} * settings_.beats_per_measure) == 0;
        outbox_.push_back(std::move(tick));
    }
}

}  // namespace jam
