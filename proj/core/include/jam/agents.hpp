#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jam/codec.hpp"
#include "jam/sampling.hpp"

namespace jam {

/// Upper bound on the conditioning window handed to an agent.
inline constexpr std::size_t kMaxContextTokens = 512;

/// Frames of melody the online stand-in scores chords against.
inline constexpr std::size_t kCompatWindowFrames = 8;

/// Conditioning window for one generation step.
///
/// tokens() is the interleaved tail of the session and always starts on a
/// melody token. An odd length means the next token is the chord of
/// current_frame(); an even length means its melody token.
class AgentContext {
public:
    /// Throws std::invalid_argument if the window exceeds kMaxContextTokens
    /// or breaks the melody/chord alternation.
    AgentContext(std::span<const Token> tokens, FrameIndex current_frame);

    std::span<const Token> tokens() const { return tokens_; }
    FrameIndex current_frame() const { return current_frame_; }
    bool expects_chord() const { return tokens_.size() % 2 == 1; }

    /// Melody tokens in the window, oldest first.
    std::vector<MelodyToken> melody() const;
    /// Chord tokens in the window, oldest first.
    std::vector<ChordToken> chords() const;

private:
    std::span<const Token> tokens_;
    FrameIndex current_frame_;
};

/// The last <= 512 tokens of seq, trimmed to start on a melody token.
std::span<const Token> context_window(std::span<const Token> seq);

/// (#frames whose sounding pitch class is in pcs) - (#frames sounding
/// outside it). Silent frames count for nothing.
int compat_score(const PitchClassSet& pcs, std::span<const std::optional<int>> sounding);

/// Most recent sounding chord symbol: HOLDs are skipped, NO_CHORD ends the
/// search.
std::optional<ChordToken> last_sounding_chord(std::span<const ChordToken> chords);

/// Best-scoring symbol for a span of sounding pitches. Order: highest
/// compat, then most frames whose pitch class is the root, then lowest root,
/// then quality order maj < min < dim < aug < maj7 < min7 < dom7.
ChordToken best_symbol(std::span<const std::optional<int>> sounding);

struct FrameRange {
    FrameIndex begin = 0;
    FrameIndex end = 0;
    FrameIndex size() const { return end - begin; }
};

/// Offline role: sees the whole melody. Harmonizes `range` beat by beat,
/// emitting the best symbol (or NO_CHORD for a silent beat) on each beat's
/// first frame and HOLD after. Throws std::invalid_argument for an empty
/// range or one outside the melody.
std::vector<ChordToken> offline_harmonize(std::span<const MelodyToken> melody, FrameRange range);

/// Incremental generator behind the request handler. Implementations are
/// stateless; all randomness comes from the caller's Rng.
class Agent {
public:
    virtual ~Agent() = default;
    virtual std::string_view id() const = 0;

    /// Requires !ctx.expects_chord().
    virtual MelodyDistribution melody_dist(const AgentContext& ctx) const = 0;
    /// Requires ctx.expects_chord().
    virtual ChordDistribution chord_dist(const AgentContext& ctx) const = 0;
};

/// Sustain-only melody anticipation: HOLD while a note sounds at the
/// frontier, REST otherwise. Never anticipates an onset.
MelodyDistribution sustain_melody_dist(const AgentContext& ctx);

/// First-order chord model. Chords change only on beat frames; on a beat
/// each candidate is weighted base(prev -> c) * exp(compat) where base is 3
/// for HOLD or a repeat, 2 for a root a fifth away, 1 otherwise.
/// With use_compat == false every compat term is 0.
class MarkovOnlineAgent final : public Agent {
public:
    explicit MarkovOnlineAgent(bool use_compat = true) : use_compat_(use_compat) {}
    std::string_view id() const override { return use_compat_ ? "markov-online" : "naive-online"; }
    MelodyDistribution melody_dist(const AgentContext& ctx) const override;
    ChordDistribution chord_dist(const AgentContext& ctx) const override;

private:
    bool use_compat_;
};

/// Deterministic best-fit chord on each beat, scored over the recent
/// melody with the same ordering as offline_harmonize().
class RuleOfflineAgent final : public Agent {
public:
    std::string_view id() const override { return "rule-offline"; }
    MelodyDistribution melody_dist(const AgentContext& ctx) const override;
    ChordDistribution chord_dist(const AgentContext& ctx) const override;
};

/// Agents keyed by their wire-visible id.
class AgentRegistry {
public:
    /// markov-online, naive-online, rule-offline.
    static AgentRegistry with_defaults();
    /// Subset of the defaults. Throws std::invalid_argument for unknown ids.
    static AgentRegistry with_ids(std::span<const std::string> ids);

    static std::vector<std::string> known_ids();

    void add(std::unique_ptr<Agent> agent);
    const Agent* find(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, std::unique_ptr<Agent>, std::less<>> agents_;
};

}  // namespace jam
