#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "jam/tokens.hpp"

namespace jam {

/// Deterministic per-request random stream.
///
/// mt19937_64 output is fixed by the standard, and next_unit() consumes
/// exactly one engine draw, so sequences are reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream for one request, keyed by session seed and target frame so a
    /// retried request replays the same draws.
    static Rng for_request(std::uint64_t session_seed, std::int64_t target_frame);

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Unnormalized weights over candidate tokens of a single kind.
template <class T>
struct TokenDistribution {
    std::vector<T> tokens;
    std::vector<double> weights;

    void add(T token, double weight) {
        tokens.push_back(token);
        weights.push_back(weight);
    }
    std::size_t size() const { return tokens.size(); }
};

using MelodyDistribution = TokenDistribution<MelodyToken>;
using ChordDistribution = TokenDistribution<ChordToken>;

class SamplingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Temperature 0 takes the argmax (lowest ordinal wins ties) and leaves the
/// rng untouched. Positive temperatures sample proportionally to
/// weight^(1/temperature) with exactly one rng draw.
template <class T>
T sample(const TokenDistribution<T>& dist, double temperature, Rng& rng);

extern template MelodyToken sample(const MelodyDistribution&, double, Rng&);
extern template ChordToken sample(const ChordDistribution&, double, Rng&);

}  // namespace jam
