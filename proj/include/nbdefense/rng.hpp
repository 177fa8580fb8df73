#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nbdefense {

// Portable random stream. The engine is std::mt19937_64, whose output sequence is fixed
// by the C++ standard; every derived quantity below is computed here rather than through
// <random> distributions, which are implementation-defined.
//   uniform01:  (next() >> 11) * 2^-53
//   below(n):   Lemire's multiply-shift with rejection
//   shuffle:    Fisher-Yates from the back using below()
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x);

// Sub-seed for stream `stream` of run `seed` (e.g. one per sweep strength).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Walker alias table over a discrete distribution; O(1) per draw.
class AliasTable {
public:
    // Weights need not be normalized; zero weights are never drawn.
    explicit AliasTable(std::span<const double> weights);

    std::size_t size() const noexcept { return prob_.size(); }
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace nbdefense
