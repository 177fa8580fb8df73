#include "nbdefense/rng.hpp"

#include <numeric>

#include "nbdefense/error.hpp"

namespace nbdefense {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return mix64(mix64(seed) ^ mix64(~stream)); }

AliasTable::AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t n = weights.size();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (n == 0 || !(total > 0.0)) throw DataError("alias table needs positive total weight");

    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0.0) throw DataError("alias table weights must be non-negative");
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding. A leftover with zero weight must never be drawn.
    for (auto i : large) {
        prob_[i] = 1.0;
        alias_[i] = i;
    }
    for (auto i : small) {
        prob_[i] = weights[i] > 0.0 ? 1.0 : 0.0;
        alias_[i] = i;
        if (weights[i] == 0.0) {
            // Route to any positive-weight entry.
            for (std::size_t k = 0; k < n; ++k) {
                if (weights[k] > 0.0) {
                    alias_[i] = static_cast<std::uint32_t>(k);
                    break;
                }
            }
        }
    }
}

std::size_t AliasTable::sample(Rng& rng) const {
    const auto column = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform01() < prob_[column] ? column : alias_[column];
}

}  // namespace nbdefense
