#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "jam/server.hpp"
#include "support/oracles.hpp"

using namespace jam;

namespace {

const AgentRegistry& agents() {
    static const AgentRegistry registry = AgentRegistry::with_defaults();
    return registry;
}

// Arpeggio melody (one note per beat, three frames each) and a chord
// history that starts after `silence` frames.
JamRequest history_request(FrameIndex target, FrameIndex silence_beats = 8) {
    JamRequest r;
    r.session_id = "s";
    r.target_frame = target;
    r.settings.silence_beats = static_cast<int>(silence_beats);
    const int pitches[] = {60, 64, 67, 72, 67, 64, 60, 55};
    for (FrameIndex f = 0; f < target; ++f) {
        const int beat_pos = static_cast<int>(f % 4);
        r.melody.push_back(beat_pos == 0   ? MelodyToken::onset(pitches[(f / 4) % 8])
                           : beat_pos == 3 ? MelodyToken::rest()
                                           : MelodyToken::hold());
        const FrameIndex silence = silence_beats * 4;
        r.chords.push_back(f < silence ? ChordToken::no_chord()
                           : f == silence ? ChordToken::symbol(0, Quality::maj)
                                          : ChordToken::hold());
    }
    return r;
}

JamResponse serve(const JamRequest& req, HandlerTrace* trace = nullptr) {
    VirtualClock clock;
    auto result = handle_request(req, agents(), clock, trace);
    if (auto* err = std::get_if<WireError>(&result)) {
        ADD_FAILURE() << "unexpected error: " << err->detail;
        return {};
    }
    return std::get<JamResponse>(result);
}

WireError::Code error_code(const JamRequest& req) {
    VirtualClock clock;
    auto result = handle_request(req, agents(), clock);
    EXPECT_TRUE(std::holds_alternative<WireError>(result));
    return std::holds_alternative<WireError>(result) ? std::get<WireError>(result).code
                                                     : WireError::Code::malformed;
}

JamRequest reference_request() {
    JamRequest req = history_request(40);
    req.session_id = "reference";
    req.settings.lookahead_beats = 4;
    req.settings.commit_beats = 2;
    req.settings.temperature = 0.0;
    req.settings.seed = 7;
    req.committed.push_back({40, ChordToken::symbol(5, Quality::maj)});
    for (FrameIndex f = 41; f < 48; ++f) req.committed.push_back({f, ChordToken::hold()});
    return req;
}

}  // namespace

TEST(Validate, Examples) {
    auto req = history_request(40);
    req.melody.pop_back();
    EXPECT_EQ(error_code(req), WireError::Code::inconsistent_history);

    req = history_request(40);
    req.settings.model_id = "gpt";
    EXPECT_EQ(error_code(req), WireError::Code::unknown_model);

    req = history_request(40);
    req.settings.commit_beats = 6;
    EXPECT_EQ(error_code(req), WireError::Code::bad_settings);
}

TEST(Validate, Precedence) {
    auto req = history_request(40);
    req.settings.commit_beats = 6;
    req.settings.model_id = "gpt";
    req.melody.pop_back();
    EXPECT_EQ(error_code(req), WireError::Code::bad_settings);
    req.settings.commit_beats = 2;
    EXPECT_EQ(error_code(req), WireError::Code::unknown_model);
    req.session_id.clear();
    EXPECT_EQ(error_code(req), WireError::Code::malformed);
}

TEST(Validate, HistoryShape) {
    auto req = history_request(8, 0);
    req.melody[4] = MelodyToken::rest();
    req.melody[5] = MelodyToken::hold();
    EXPECT_EQ(error_code(req), WireError::Code::inconsistent_history);

    req = history_request(8, 0);
    req.chords[0] = ChordToken::hold();
    EXPECT_EQ(error_code(req), WireError::Code::inconsistent_history);

    req = history_request(8);
    req.committed = {{9, ChordToken::hold()}};
    EXPECT_EQ(error_code(req), WireError::Code::inconsistent_history);

    req = history_request(8);
    req.settings.commit_beats = 1;
    for (FrameIndex f = 8; f < 13; ++f) req.committed.push_back({f, ChordToken::hold()});
    EXPECT_EQ(error_code(req), WireError::Code::inconsistent_history);

    req = history_request(0);
    req.committed = {{0, ChordToken::hold()}};
    EXPECT_EQ(error_code(req), WireError::Code::inconsistent_history);
}

TEST(WarmStart, TriggerWindow) {
    auto req = history_request(28);
    auto warm = maybe_warm_start(req);
    ASSERT_TRUE(warm);
    EXPECT_EQ(warm->size(), 28u);
    EXPECT_EQ(*warm, offline_harmonize(req.melody, {0, 28}));

    EXPECT_TRUE(maybe_warm_start(history_request(29)));  // after a dropped frame-28 request
    EXPECT_TRUE(maybe_warm_start(history_request(31)));
    EXPECT_FALSE(maybe_warm_start(history_request(27)));
    EXPECT_FALSE(maybe_warm_start(history_request(32)));

    for (FrameIndex t = 0; t < 40; ++t) EXPECT_FALSE(maybe_warm_start(history_request(t, 0))) << t;

    auto echoed = history_request(29);
    std::copy(warm->begin(), warm->end(), echoed.chords.begin());
    EXPECT_FALSE(maybe_warm_start(echoed));
}

TEST(WarmStart, ResponseCarriesItAndStaysSilent) {
    HandlerTrace trace;
    const auto resp = serve(history_request(28), &trace);
    ASSERT_TRUE(resp.warm_start);
    EXPECT_TRUE(trace.warm_started);
    EXPECT_EQ(resp.warm_start->start_frame, 0);
    EXPECT_EQ(resp.warm_start->chords.size(), 28u);
    for (int i = 0; i < 4; ++i) EXPECT_TRUE(resp.chords[static_cast<std::size_t>(i)].is_no_chord());
}

TEST(Handler, ResponseShape) {
    for (int lookahead : {1, 2, 4, 8}) {
        for (int commit = 0; commit <= lookahead; ++commit) {
            auto req = history_request(48);
            req.settings.lookahead_beats = lookahead;
            req.settings.commit_beats = commit;
            const auto resp = serve(req);
            ASSERT_EQ(resp.chords.size(), static_cast<std::size_t>(lookahead * 4));
            ASSERT_EQ(resp.voicings.size(), resp.chords.size());
            for (std::size_t i = 0; i < resp.chords.size(); ++i) {
                if (resp.chords[i].is_symbol()) {
                    EXPECT_EQ(resp.voicings[i], voice_chord(resp.chords[i]));
                } else {
                    EXPECT_TRUE(resp.voicings[i].empty());
                }
            }
        }
    }
}

TEST(Handler, CommitPeriodIsPinned) {
    const auto req = reference_request();
    HandlerTrace trace;
    const auto resp = serve(req, &trace);
    ASSERT_EQ(resp.chords.size(), 16u);
    for (std::size_t i = 0; i < req.committed.size(); ++i) EXPECT_EQ(resp.chords[i], req.committed[i].token);
    // 8 adaptive tokens follow the commit period, and the whole lookahead
    // was anticipated with sustain-only melody.
    EXPECT_EQ(resp.chords.size() - req.committed.size(), 8u);
    ASSERT_EQ(trace.anticipated_melody.size(), 16u);
    for (auto m : trace.anticipated_melody) EXPECT_FALSE(m.is_onset());
}

TEST(Handler, CommitZeroAndEmptyHistory) {
    JamRequest req;
    req.session_id = "empty";
    req.settings.commit_beats = 0;
    req.settings.silence_beats = 0;
    req.settings.temperature = 0.0;
    const auto resp = serve(req);
    ASSERT_EQ(resp.chords.size(), 16u);
    for (auto c : resp.chords) EXPECT_TRUE(c.is_no_chord());
}

TEST(Handler, PartialCommitListIsCompleted) {
    auto req = reference_request();
    req.committed.resize(3);
    const auto resp = serve(req);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(resp.chords[i], req.committed[i].token);
    EXPECT_EQ(resp.chords.size(), 16u);
}

TEST(Handler, SilencePeriodChordsAreNoChord) {
    for (FrameIndex target : {1, 10, 20, 27}) {
        auto req = history_request(target);
        req.settings.commit_beats = 0;
        const auto resp = serve(req);
        for (std::size_t i = 0; i < resp.chords.size(); ++i) {
            if (target + static_cast<FrameIndex>(i) < 32) EXPECT_TRUE(resp.chords[i].is_no_chord());
        }
    }
}

TEST(Handler, IdenticalRequestsGiveIdenticalBytes) {
    auto req = history_request(64);
    req.settings.temperature = 1.3;
    req.settings.seed = 99;
    EXPECT_EQ(encode(serve(req)), encode(serve(req)));
}

TEST(Handler, StatelessAcrossInterleavedSessions) {
    std::vector<JamRequest> reqs;
    for (int i = 0; i < 12; ++i) {
        auto r = history_request(33 + i * 5);
        r.session_id = "s" + std::to_string(i % 3);
        r.settings.seed = static_cast<std::uint64_t>(i);
        reqs.push_back(r);
    }
    std::vector<std::string> in_order;
    for (const auto& r : reqs) in_order.push_back(encode(serve(r)));
    std::vector<std::size_t> idx(reqs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(1);
    for (int round = 0; round < 3; ++round) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (auto i : idx) EXPECT_EQ(encode(serve(reqs[i])), in_order[i]);
    }
}

TEST(Handler, SeedAndTargetSelectTheStream) {
    auto req = history_request(64);
    req.settings.commit_beats = 0;
    req.settings.model_id = "naive-online";
    std::set<std::string> outputs;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        req.settings.seed = seed;
        outputs.insert(encode_chords(serve(req).chords));
    }
    EXPECT_GT(outputs.size(), 1u);
}

TEST(Handler, ContextWindowNeverExceeds512) {
    for (FrameIndex target : {0, 1, 255, 256, 257, 600, 10000}) {
        auto req = history_request(target);
        HandlerTrace trace;
        (void)serve(req, &trace);
        EXPECT_LE(trace.max_context_tokens, kMaxContextTokens) << target;
        if (target >= 256) EXPECT_EQ(trace.max_context_tokens, kMaxContextTokens) << target;
    }
}

TEST(Handler, CommitStabilityProperty) {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        JamRequest req;
        req.session_id = "p";
        req.settings.lookahead_beats = 1 + static_cast<int>(rng() % 6);
        req.settings.commit_beats = static_cast<int>(rng() % (req.settings.lookahead_beats + 1));
        req.settings.silence_beats = static_cast<int>(rng() % 9);
        req.settings.temperature = static_cast<double>(rng() % 20) / 10.0;
        req.settings.seed = rng();
        req.settings.model_id = AgentRegistry::known_ids()[rng() % 3];
        req.melody = oracle::random_melody(rng, rng() % 80);
        req.target_frame = static_cast<FrameIndex>(req.melody.size());
        for (FrameIndex f = 0; f < req.target_frame; ++f) {
            req.chords.push_back(f == 0 || rng() % 2 ? ChordToken::no_chord() : ChordToken::hold());
        }
        const auto n = rng() % static_cast<std::uint64_t>(req.settings.commit_frames() + 1);
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto f = req.target_frame + static_cast<FrameIndex>(i);
            const auto pick = rng() % 3;
            req.committed.push_back({f, pick == 0 && f > 0 ? ChordToken::hold()
                                        : pick == 1       ? ChordToken::no_chord()
                                                          : ChordToken::from_symbol_index(static_cast<int>(rng() % 84))});
        }
        const auto resp = serve(req);
        ASSERT_EQ(resp.chords.size(), static_cast<std::size_t>(req.settings.lookahead_frames()));
        for (std::size_t i = 0; i < req.committed.size(); ++i) ASSERT_EQ(resp.chords[i], req.committed[i].token);
    }
}

TEST(Handler, GenMsUsesTheInjectedClock) {
    VirtualClock clock(500.0);
    auto result = handle_request(history_request(40), agents(), clock);
    EXPECT_EQ(std::get<JamResponse>(result).gen_ms, 0.0);
}

TEST(Handler, ReferenceGoldenResponse) {
    const std::string path = std::string(JAM_GOLDEN_DIR) + "/reference_response.txt";
    const std::string body = encode(serve(reference_request()));
    if (std::getenv("JAM_UPDATE_GOLDEN") != nullptr) {
        std::ofstream(path, std::ios::binary) << body;
    }
    std::ifstream in(path, std::ios::binary);
    ASSERT_TRUE(in) << "missing golden file " << path;
    std::ostringstream expected;
    expected << in.rdbuf();
    EXPECT_EQ(body, expected.str());
}
