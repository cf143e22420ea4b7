#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "jam/agents.hpp"
#include "jam/server.hpp"
#include "jam/sim.hpp"
#include "jam/wire.hpp"

namespace {

using namespace jam;

const AgentRegistry& registry() {
    static const AgentRegistry r = AgentRegistry::with_defaults();
    return r;
}

std::vector<MelodyToken> random_melody(std::mt19937_64& rng, FrameIndex frames) {
    std::vector<MelodyToken> out;
    out.reserve(static_cast<std::size_t>(frames));
    for (FrameIndex f = 0; f < frames; ++f) {
        const auto r = rng() % 8;
        // HOLD needs a sounding note before it.
        const bool can_hold = !out.empty() && !out.back().is_rest();
        if (r == 0) out.push_back(MelodyToken::rest());
        else if (r < 3 || !can_hold) out.push_back(MelodyToken::onset(static_cast<int>(55 + rng() % 25)));
        else out.push_back(MelodyToken::hold());
    }
    return out;
}

JamRequest history_request(FrameIndex target, const std::string& model) {
    JamRequest req;
    req.session_id = "bench";
    req.target_frame = target;
    req.settings.model_id = model;
    req.settings.lookahead_beats = 4;
    req.settings.commit_beats = 2;
    std::mt19937_64 rng(5);
    req.melody = random_melody(rng, target);
    for (FrameIndex f = 0; f < target; ++f)
        req.chords.push_back(f % 4 == 0 ? ChordToken::from_symbol_index(static_cast<int>(rng() % 84))
                                        : ChordToken::hold());
    for (FrameIndex f = target; f < target + 8; ++f) req.committed.push_back({f, ChordToken::hold()});
    return req;
}

void BM_Handle(benchmark::State& state, const std::string& model) {
    auto req = history_request(state.range(0), model);
    SteadyClock clock;
    if (auto err = validate_request(req, registry())) {
        state.SkipWithError(err->detail.c_str());
        return;
    }
    std::uint64_t seed = 0;
    for (auto _ : state) {
        req.settings.seed = seed++;
        auto result = handle_request(req, registry(), clock);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK_CAPTURE(BM_Handle, markov_online, std::string("markov-online"))->Arg(100)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(BM_Handle, naive_online, std::string("naive-online"))->Arg(10000);
BENCHMARK_CAPTURE(BM_Handle, rule_offline, std::string("rule-offline"))->Arg(10000);

void BM_WireRoundTrip(benchmark::State& state) {
    const auto req = history_request(state.range(0), "markov-online");
    for (auto _ : state) {
        auto decoded = decode(encode(req));
        benchmark::DoNotOptimize(decoded);
    }
}
BENCHMARK(BM_WireRoundTrip)->Arg(10000);

void BM_OfflineHarmonize(benchmark::State& state) {
    std::mt19937_64 rng(9);
    const auto melody = random_melody(rng, state.range(0));
    for (auto _ : state) {
        auto chords = offline_harmonize(melody, FrameRange{0, state.range(0)});
        benchmark::DoNotOptimize(chords);
    }
}
BENCHMARK(BM_OfflineHarmonize)->Arg(1000)->Arg(10000);

void BM_SimFixture(benchmark::State& state) {
    SimConfig cfg;
    cfg.script = arpeggio_fixture();
    cfg.settings.lookahead_beats = 4;
    cfg.settings.commit_beats = 2;
    cfg.latency = LatencyModel::fixed(500.0);
    cfg.frames = state.range(0);
    for (auto _ : state) {
        auto report = run_sim(cfg, registry());
        benchmark::DoNotOptimize(report);
    }
}
BENCHMARK(BM_SimFixture)->Arg(288)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
