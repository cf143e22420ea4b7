#include "jam/server.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace jam {
namespace {

WireError error(WireError::Code code, std::string detail) { return WireError{code, std::move(detail)}; }

}  // namespace

std::optional<WireError> validate_request(const JamRequest& req, const AgentRegistry& agents) {
    using Code = WireError::Code;
    if (req.session_id.empty()) return error(Code::malformed, "session_id is empty");
    if (req.target_frame < 0) return error(Code::malformed, "target_frame is negative");
    if (auto problem = req.settings.validate()) return error(Code::bad_settings, *problem);
    if (agents.find(req.settings.model_id) == nullptr) {
        return error(Code::unknown_model, "unknown model '" + req.settings.model_id + "'");
    }

    const auto target = static_cast<std::size_t>(req.target_frame);
    if (req.melody.size() != target) {
        return error(Code::inconsistent_history, "melody covers " + std::to_string(req.melody.size()) +
                                                     " frames, target_frame is " + std::to_string(target));
    }
    if (req.chords.size() != target) {
        return error(Code::inconsistent_history, "chords cover " + std::to_string(req.chords.size()) +
                                                     " frames, target_frame is " + std::to_string(target));
    }
    // Monophony is implied by one token per frame; a HOLD still needs a note to sustain.
    for (std::size_t f = 0; f < req.melody.size(); ++f) {
        if (req.melody[f].is_hold() && (f == 0 || req.melody[f - 1].is_rest())) {
            return error(Code::inconsistent_history, "melody HOLD without a sounding note at frame " +
                                                         std::to_string(f));
        }
    }
    if (!req.chords.empty() && req.chords.front().is_hold()) {
        return error(Code::inconsistent_history, "chord history starts with HOLD");
    }
    if (static_cast<FrameIndex>(req.committed.size()) > req.settings.commit_frames()) {
        return error(Code::inconsistent_history, "more committed chords than commit frames");
    }
    for (std::size_t i = 0; i < req.committed.size(); ++i) {
        if (req.committed[i].frame != req.target_frame + static_cast<FrameIndex>(i)) {
            return error(Code::inconsistent_history,
                         "committed chords must be contiguous from target_frame");
        }
    }
    if (req.target_frame == 0 && !req.committed.empty() && req.committed.front().token.is_hold()) {
        return error(Code::inconsistent_history, "committed HOLD at frame 0");
    }
    return std::nullopt;
}

std::optional<std::vector<ChordToken>> maybe_warm_start(const JamRequest& req) {
    const FrameIndex silence = req.settings.silence_frames();
    if (silence < kFramesPerBeat) return std::nullopt;
    if (req.target_frame < silence - kFramesPerBeat || req.target_frame >= silence) return std::nullopt;
    if (req.target_frame == 0) return std::nullopt;
    const bool heard_chords = std::any_of(req.chords.begin(), req.chords.end(),
                                          [](ChordToken c) { return !c.is_no_chord(); });
    if (heard_chords) return std::nullopt;
    return offline_harmonize(req.melody, FrameRange{0, req.target_frame});
}

Generation::Generation(const JamRequest& req, const FrameGrid& history, const Agent& agent,
                       HandlerTrace* trace)
    : agent_(agent),
      trace_(trace),
      temperature_(req.settings.temperature),
      silence_frames_(req.settings.silence_frames()),
      rng_(Rng::for_request(req.settings.seed, req.target_frame)),
      next_frame_(req.target_frame) {
    // Only the tail that can reach the conditioning window is materialized.
    const std::size_t frames = history.frames();
    const std::size_t keep = std::min(frames, kMaxContextTokens / 2);
    seq_.reserve(keep * 2 + static_cast<std::size_t>(req.settings.lookahead_frames()) * 2);
    for (std::size_t f = frames - keep; f < frames; ++f) {
        seq_.emplace_back(history.melody[f]);
        seq_.emplace_back(history.chords[f]);
    }
}

void Generation::observe_context(std::size_t tokens) {
    if (trace_ == nullptr) return;
    trace_->max_context_tokens = std::max(trace_->max_context_tokens, tokens);
    ++trace_->agent_calls;
}

std::pair<MelodyToken, ChordToken> Generation::step() {
    const FrameIndex frame = next_frame_;

    const AgentContext melody_ctx(context_window(seq_), frame);
    observe_context(melody_ctx.tokens().size());
    const MelodyToken melody = sample(agent_.melody_dist(melody_ctx), temperature_, rng_);
    seq_.emplace_back(melody);

    ChordToken chord = ChordToken::no_chord();
    if (frame >= silence_frames_) {
        const AgentContext chord_ctx(context_window(seq_), frame);
        observe_context(chord_ctx.tokens().size());
        chord = sample(agent_.chord_dist(chord_ctx), temperature_, rng_);
    }
    seq_.emplace_back(chord);

    if (trace_ != nullptr) trace_->anticipated_melody.push_back(melody);
    ++next_frame_;
    return {melody, chord};
}

void Generation::replace_chord(FrameIndex frame, ChordToken chord) {
    const FrameIndex back = next_frame_ - frame;
    if (back <= 0 || static_cast<std::size_t>(back) * 2 > seq_.size()) {
        throw std::out_of_range("replace_chord: frame " + std::to_string(frame) + " not generated");
    }
    seq_[seq_.size() - static_cast<std::size_t>(back) * 2 + 1] = chord;
}

CommitPeriod fill_commit_period(const JamRequest& req, Generation& gen) {
    CommitPeriod out;
    const FrameIndex end = req.target_frame + req.settings.commit_frames();
    // Generate freely up to the last committed frame, then pin the committed
    // chords. Frames past it condition on the pinned plan.
    const FrameIndex pinned_end =
        std::min(end, req.target_frame + static_cast<FrameIndex>(req.committed.size()));
    auto generate_until = [&](FrameIndex stop) {
        while (gen.next_frame() < stop) {
            auto [melody, chord] = gen.step();
            out.anticipated_melody.push_back(melody);
            out.chords.push_back(chord);
        }
    };
    generate_until(pinned_end);
    for (std::size_t i = 0; i < out.chords.size(); ++i) {
        out.chords[i] = req.committed[i].token;
        gen.replace_chord(req.committed[i].frame, req.committed[i].token);
    }
    generate_until(end);
    return out;
}

std::vector<ChordToken> fill_adaptive_period(const JamRequest& req, Generation& gen) {
    std::vector<ChordToken> chords;
    const FrameIndex end = req.target_frame + req.settings.lookahead_frames();
    while (gen.next_frame() < end) chords.push_back(gen.step().second);
    return chords;
}

HandlerResult handle_request(const JamRequest& req, const AgentRegistry& agents,
                             const MonotonicClock& clock, HandlerTrace* trace) {
    const Millis started = clock.now_ms();
    if (auto err = validate_request(req, agents)) return *err;
    const Agent& agent = *agents.find(req.settings.model_id);

    FrameGrid history{req.melody, req.chords};
    JamResponse resp;
    resp.session_id = req.session_id;
    resp.target_frame = req.target_frame;

    if (auto warm = maybe_warm_start(req)) {
        history.chords = *warm;
        resp.warm_start = WarmStart{0, std::move(*warm)};
        if (trace != nullptr) trace->warm_started = true;
    }

    Generation gen(req, history, agent, trace);
    CommitPeriod commit = fill_commit_period(req, gen);
    resp.chords = std::move(commit.chords);
    const auto adaptive = fill_adaptive_period(req, gen);
    resp.chords.insert(resp.chords.end(), adaptive.begin(), adaptive.end());

    resp.voicings.reserve(resp.chords.size());
    for (ChordToken c : resp.chords) {
        resp.voicings.push_back(c.is_symbol() ? voice_chord(c) : std::vector<int>{});
    }
    resp.gen_ms = clock.now_ms() - started;
    return resp;
}

}  // namespace jam
