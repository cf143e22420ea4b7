#include "jam/agents.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace jam {
namespace {

bool is_beat_frame(FrameIndex f) { return f % kFramesPerBeat == 0; }

std::vector<std::optional<int>> recent_sounding(const AgentContext& ctx) {
    const auto melody = ctx.melody();
    auto sounding = sounding_pitches(melody);
    if (sounding.size() > kCompatWindowFrames) {
        sounding.erase(sounding.begin(),
                       sounding.end() - static_cast<std::ptrdiff_t>(kCompatWindowFrames));
    }
    return sounding;
}

int sounding_count(std::span<const std::optional<int>> sounding) {
    int n = 0;
    for (const auto& p : sounding) n += p.has_value() ? 1 : 0;
    return n;
}

ChordDistribution one_hot(ChordToken t) {
    ChordDistribution d;
    d.add(t, 1.0);
    return d;
}

ChordDistribution off_beat_dist(const std::optional<ChordToken>& prev) {
    return one_hot(prev ? ChordToken::hold() : ChordToken::no_chord());
}

void require_chord_position(const AgentContext& ctx) {
    if (!ctx.expects_chord()) throw std::invalid_argument("chord requested at a melody position");
}

}  // namespace

AgentContext::AgentContext(std::span<const Token> tokens, FrameIndex current_frame)
    : tokens_(tokens), current_frame_(current_frame) {
    if (tokens.size() > kMaxContextTokens) {
        throw std::invalid_argument("agent context exceeds " + std::to_string(kMaxContextTokens) +
                                    " tokens: " + std::to_string(tokens.size()));
    }
    if (current_frame < 0) throw std::invalid_argument("agent context frame is negative");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool melody_slot = i % 2 == 0;
        if (melody_slot != std::holds_alternative<MelodyToken>(tokens[i])) {
            throw std::invalid_argument("agent context breaks alternation at " + std::to_string(i));
        }
    }
}

std::vector<MelodyToken> AgentContext::melody() const {
    std::vector<MelodyToken> out;
    out.reserve((tokens_.size() + 1) / 2);
    for (std::size_t i = 0; i < tokens_.size(); i += 2) out.push_back(std::get<MelodyToken>(tokens_[i]));
    return out;
}

std::vector<ChordToken> AgentContext::chords() const {
    std::vector<ChordToken> out;
    out.reserve(tokens_.size() / 2);
    for (std::size_t i = 1; i < tokens_.size(); i += 2) out.push_back(std::get<ChordToken>(tokens_[i]));
    return out;
}

std::span<const Token> context_window(std::span<const Token> seq) {
    std::size_t start = seq.size() > kMaxContextTokens ? seq.size() - kMaxContextTokens : 0;
    if (start % 2 != 0) ++start;
    return seq.subspan(start);
}

int compat_score(const PitchClassSet& pcs, std::span<const std::optional<int>> sounding) {
    int score = 0;
    for (const auto& p : sounding) {
        if (!p) continue;
        score += pcs.test(static_cast<std::size_t>(*p % 12)) ? 1 : -1;
    }
    return score;
}

std::optional<ChordToken> last_sounding_chord(std::span<const ChordToken> chords) {
    for (auto it = chords.rbegin(); it != chords.rend(); ++it) {
        if (it->is_hold()) continue;
        if (it->is_symbol()) return *it;
        return std::nullopt;
    }
    return std::nullopt;
}

ChordToken best_symbol(std::span<const std::optional<int>> sounding) {
    std::array<int, 12> pc_frames{};
    for (const auto& p : sounding) {
        if (p) ++pc_frames[static_cast<std::size_t>(*p % 12)];
    }
    int best_index = 0;
    int best_compat = 0;
    int best_support = -1;
    // Ascending index is ascending (root, quality), so strict > keeps the
    // earliest candidate on ties.
    for (int index = 0; index < kSymbolCount; ++index) {
        const ChordToken c = ChordToken::from_symbol_index(index);
        const int compat = compat_score(chord_pcs(c), sounding);
        const int support = pc_frames[static_cast<std::size_t>(c.root())];
        if (best_support < 0 || compat > best_compat ||
            (compat == best_compat && support > best_support)) {
            best_index = index;
            best_compat = compat;
            best_support = support;
        }
    }
    return ChordToken::from_symbol_index(best_index);
}

std::vector<ChordToken> offline_harmonize(std::span<const MelodyToken> melody, FrameRange range) {
    if (range.size() <= 0) throw std::invalid_argument("offline_harmonize: empty frame range");
    if (range.begin < 0 || range.end > static_cast<FrameIndex>(melody.size())) {
        throw std::invalid_argument("offline_harmonize: range outside the melody");
    }
    const auto sounding = sounding_pitches(melody);
    std::vector<ChordToken> out;
    out.reserve(static_cast<std::size_t>(range.size()));
    FrameIndex window_begin = range.begin;
    while (window_begin < range.end) {
        const FrameIndex next_beat = (window_begin / kFramesPerBeat + 1) * kFramesPerBeat;
        const FrameIndex window_end = std::min(next_beat, range.end);
        const std::span<const std::optional<int>> window(
            sounding.data() + window_begin, static_cast<std::size_t>(window_end - window_begin));
        out.push_back(sounding_count(window) == 0 ? ChordToken::no_chord() : best_symbol(window));
        for (FrameIndex f = window_begin + 1; f < window_end; ++f) out.push_back(ChordToken::hold());
        window_begin = window_end;
    }
    return out;
}

MelodyDistribution sustain_melody_dist(const AgentContext& ctx) {
    if (ctx.expects_chord()) throw std::invalid_argument("melody requested at a chord position");
    const auto tokens = ctx.tokens();
    bool sounding = false;
    if (tokens.size() >= 2) {
        const auto& frontier = std::get<MelodyToken>(tokens[tokens.size() - 2]);
        sounding = !frontier.is_rest();
    }
    MelodyDistribution d;
    d.add(sounding ? MelodyToken::hold() : MelodyToken::rest(), 1.0);
    return d;
}

MelodyDistribution MarkovOnlineAgent::melody_dist(const AgentContext& ctx) const {
    return sustain_melody_dist(ctx);
}

ChordDistribution MarkovOnlineAgent::chord_dist(const AgentContext& ctx) const {
    require_chord_position(ctx);
    const auto prev = last_sounding_chord(ctx.chords());
    if (!is_beat_frame(ctx.current_frame())) return off_beat_dist(prev);

    const auto sounding = recent_sounding(ctx);
    auto weight = [&](double base, int compat) {
        return base * std::exp(use_compat_ ? static_cast<double>(compat) : 0.0);
    };

    ChordDistribution d;
    if (prev) {
        d.add(ChordToken::hold(), weight(3.0, compat_score(chord_pcs(*prev), sounding)));
    } else {
        d.add(ChordToken::no_chord(), weight(1.0, -sounding_count(sounding)));
    }
    for (int index = 0; index < kSymbolCount; ++index) {
        const ChordToken c = ChordToken::from_symbol_index(index);
        double base = 1.0;
        if (prev) {
            const int interval = ((c.root() - prev->root()) % 12 + 12) % 12;
            if (c == *prev) {
                base = 3.0;
            } else if (interval == 7 || interval == 5) {
                base = 2.0;
            }
        }
        d.add(c, weight(base, compat_score(chord_pcs(c), sounding)));
    }
    return d;
}

MelodyDistribution RuleOfflineAgent::melody_dist(const AgentContext& ctx) const {
    return sustain_melody_dist(ctx);
}

ChordDistribution RuleOfflineAgent::chord_dist(const AgentContext& ctx) const {
    require_chord_position(ctx);
    const auto prev = last_sounding_chord(ctx.chords());
    if (!is_beat_frame(ctx.current_frame())) return off_beat_dist(prev);

    const auto sounding = recent_sounding(ctx);
    if (sounding_count(sounding) == 0) return off_beat_dist(prev);
    const ChordToken best = best_symbol(sounding);
    return one_hot(prev && *prev == best ? ChordToken::hold() : best);
}

AgentRegistry AgentRegistry::with_defaults() {
    AgentRegistry r;
    r.add(std::make_unique<MarkovOnlineAgent>(true));
    r.add(std::make_unique<MarkovOnlineAgent>(false));
    r.add(std::make_unique<RuleOfflineAgent>());
    return r;
}

AgentRegistry AgentRegistry::with_ids(std::span<const std::string> ids) {
    AgentRegistry all = with_defaults();
    AgentRegistry r;
    for (const auto& id : ids) {
        auto it = all.agents_.find(id);
        if (it == all.agents_.end()) {
            if (r.find(id) != nullptr) continue;
            throw std::invalid_argument("unknown agent id: " + id);
        }
        r.agents_.emplace(it->first, std::move(it->second));
        all.agents_.erase(it);
    }
    return r;
}

std::vector<std::string> AgentRegistry::known_ids() { return with_defaults().ids(); }

void AgentRegistry::add(std::unique_ptr<Agent> agent) {
    std::string key(agent->id());
    agents_[key] = std::move(agent);
}

const Agent* AgentRegistry::find(std::string_view id) const {
    auto it = agents_.find(id);
    return it == agents_.end() ? nullptr : it->second.get();
}

std::vector<std::string> AgentRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, agent] : agents_) out.push_back(id);
    return out;
}

}  // namespace jam
