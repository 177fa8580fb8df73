#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "nbdefense/corpus.hpp"
#include "nbdefense/nb_core.hpp"

namespace testutil {

// Random sparse doc over `n` words with counts in [0, max_count].
inline nbdefense::DocVector random_doc(std::mt19937_64& gen, std::size_t n, std::uint32_t max_count) {
    std::vector<std::uint32_t> dense(n);
    std::uniform_int_distribution<std::uint32_t> count(0, max_count);
    for (auto& c : dense) c = count(gen);
    return nbdefense::DocVector::from_dense(dense);
}

inline nbdefense::Docs random_docs(std::mt19937_64& gen, std::size_t count, std::size_t n, std::uint32_t max_count) {
    nbdefense::Docs docs;
    for (std::size_t i = 0; i < count; ++i) docs.push_back(random_doc(gen, n, max_count));
    return docs;
}

// Random strictly positive distribution.
inline nbdefense::NbParams random_params(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(n);
    for (auto& v : w) v = u(gen);
    return nbdefense::NbParams::from_probabilities(w);
}

inline nbdefense::DocVector doc(std::initializer_list<std::pair<nbdefense::WordIndex, std::uint32_t>> entries) {
    std::map<nbdefense::WordIndex, std::uint32_t> counts;
    for (auto [i, c] : entries) counts[i] += c;
    return nbdefense::DocVector::from_counts(counts);
}

}  // namespace testutil
