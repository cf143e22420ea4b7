#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "jam/agents.hpp"
#include "jam/clock.hpp"
#include "jam/codec.hpp"
#include "jam/wire.hpp"

namespace jam {

/// Side-channel observations from one handler call. Not part of the wire.
struct HandlerTrace {
    std::size_t max_context_tokens = 0;
    std::size_t agent_calls = 0;
    bool warm_started = false;
    /// Melody the agent anticipated over the whole lookahead; discarded by
    /// the handler, kept here for inspection only.
    std::vector<MelodyToken> anticipated_melody;
};

/// Structural and semantic checks. nullopt means the request may be served.
std::optional<WireError> validate_request(const JamRequest& req, const AgentRegistry& agents);

/// Offline harmonization of [0, target_frame) when the request falls in the
/// last beat of the silence period and no chord has been heard yet. Since
/// the server keeps no state, "once per session" is inferred from the
/// history: after a warm-start the client echoes its chords back.
std::optional<std::vector<ChordToken>> maybe_warm_start(const JamRequest& req);

/// Autoregressive state for one request: the interleaved history tail plus
/// everything generated so far.
class Generation {
public:
    /// `history` covers frames [0, req.target_frame); the request must be valid.
    Generation(const JamRequest& req, const FrameGrid& history, const Agent& agent,
               HandlerTrace* trace = nullptr);

    /// Generates the melody token and chord token of the next frame.
    std::pair<MelodyToken, ChordToken> step();

    /// Overwrites the chord already generated for `frame`, so later steps
    /// condition on the replacement.
    void replace_chord(FrameIndex frame, ChordToken chord);

    FrameIndex next_frame() const { return next_frame_; }

private:
    void observe_context(std::size_t tokens);

    const Agent& agent_;
    HandlerTrace* trace_;
    double temperature_;
    FrameIndex silence_frames_;
    Rng rng_;
    std::vector<Token> seq_;
    FrameIndex next_frame_;
};

struct CommitPeriod {
    std::vector<MelodyToken> anticipated_melody;
    std::vector<ChordToken> chords;
};

/// Frames [target, target + commit_frames): generate, then pin every chord
/// the request committed. Frames with no committed entry keep the generated
/// chord.
CommitPeriod fill_commit_period(const JamRequest& req, Generation& gen);

/// Remaining lookahead frames, conditioned on the commit period. Only the
/// chords are returned; anticipated melody is dropped.
std::vector<ChordToken> fill_adaptive_period(const JamRequest& req, Generation& gen);

using HandlerResult = std::variant<JamResponse, WireError>;

/// Serves one request. Output depends only on the request (and the clock,
/// through gen_ms). Chords for frames still inside the silence period are
/// always NO_CHORD.
HandlerResult handle_request(const JamRequest& req, const AgentRegistry& agents,
                             const MonotonicClock& clock, HandlerTrace* trace = nullptr);

}  // namespace jam
