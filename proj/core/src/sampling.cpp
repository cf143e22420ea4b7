#include "jam/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jam {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng Rng::for_request(std::uint64_t session_seed, std::int64_t target_frame) {
    return Rng(splitmix64(splitmix64(session_seed) ^ static_cast<std::uint64_t>(target_frame)));
}

template <class T>
T sample(const TokenDistribution<T>& dist, double temperature, Rng& rng) {
    if (dist.tokens.empty() || dist.tokens.size() != dist.weights.size()) {
        throw SamplingError("sample: empty or inconsistent distribution");
    }
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw SamplingError("sample: temperature must be non-negative and finite");
    }
    double max_weight = 0.0;
    for (double w : dist.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw SamplingError("sample: weights must be finite and non-negative");
        }
        max_weight = std::max(max_weight, w);
    }
    if (max_weight <= 0.0) throw SamplingError("sample: all weights are zero");

    // Candidates in ordinal order so both paths are independent of insertion order.
    std::vector<std::size_t> order(dist.tokens.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dist.tokens[a].ordinal() < dist.tokens[b].ordinal();
    });

    if (temperature == 0.0) {
        std::size_t best = order.front();
        for (std::size_t i : order) {
            if (dist.weights[i] > dist.weights[best]) best = i;
        }
        return dist.tokens[best];
    }

    std::vector<double> scaled(order.size());
    double total = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double w = dist.weights[order[k]];
        scaled[k] = w > 0.0 ? std::pow(w / max_weight, 1.0 / temperature) : 0.0;
        total += scaled[k];
    }
    const double u = rng.next_unit() * total;
    double cumulative = 0.0;
    std::size_t last_positive = order.front();
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (scaled[k] <= 0.0) continue;
        last_positive = order[k];
        cumulative += scaled[k];
        if (u < cumulative) return dist.tokens[order[k]];
    }
    return dist.tokens[last_positive];
}

template MelodyToken sample(const MelodyDistribution&, double, Rng&);
template ChordToken sample(const ChordDistribution&, double, Rng&);

}  // namespace jam
