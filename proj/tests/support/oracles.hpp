#pragma once
// Independent reference computations for tests. Nothing here calls the library's
// numeric routines; inputs are plain dense arrays.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cstdint>
#include <vector>

#include "nbdefense/corpus.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using BigFloat = boost::multiprecision::cpp_bin_float_50;

using DenseDoc = std::vector<std::uint32_t>;

inline DenseDoc densify(const nbdefense::DocVector& doc, std::size_t n) {
    DenseDoc out(n, 0);
    for (const auto& e : doc.entries) out[e.index] += e.count;
    return out;
}

inline Rational rpow(const Rational& base, std::uint32_t e) {
    Rational r = 1;
    for (std::uint32_t i = 0; i < e; ++i) r *= base;
    return r;
}

// P[x | component] without the multinomial coefficient, exactly.
inline Rational likelihood(const std::vector<Rational>& lambda, const DenseDoc& x) {
    Rational p = 1;
    for (std::size_t l = 0; l < x.size(); ++l) p *= rpow(lambda[l], x[l]);
    return p;
}

struct ExactMixture {
    std::array<Rational, 2> beta;
    std::array<std::vector<Rational>, 2> lambda;
};

inline std::vector<std::array<Rational, 2>> e_step(const ExactMixture& m, const std::vector<DenseDoc>& docs) {
    std::vector<std::array<Rational, 2>> r;
    for (const auto& x : docs) {
        const Rational a = m.beta[0] * likelihood(m.lambda[0], x);
        const Rational b = m.beta[1] * likelihood(m.lambda[1], x);
        r.push_back({a / (a + b), b / (a + b)});
    }
    return r;
}

inline ExactMixture m_step(const std::vector<std::array<Rational, 2>>& r, const std::vector<DenseDoc>& docs,
                           const Rational& eps) {
    const std::size_t n = docs.front().size();
    ExactMixture m;
    for (int j = 0; j < 2; ++j) {
        Rational mass = 0, words = 0;
        std::vector<Rational> counts(n, Rational(0));
        for (std::size_t d = 0; d < docs.size(); ++d) {
            mass += r[d][j];
            for (std::size_t l = 0; l < n; ++l) {
                counts[l] += r[d][j] * docs[d][l];
                words += r[d][j] * docs[d][l];
            }
        }
        m.beta[j] = mass / static_cast<int>(docs.size());
        m.lambda[j].resize(n);
        for (std::size_t l = 0; l < n; ++l) m.lambda[j][l] = (counts[l] + eps) / (words + eps * static_cast<int>(n));
    }
    return m;
}

inline BigFloat to_big(const Rational& q) {
    return BigFloat(boost::multiprecision::numerator(q)) / BigFloat(boost::multiprecision::denominator(q));
}

// sum_d log(sum_j beta_j P[x_d | j]) with the inner sum exact.
inline BigFloat total_log_likelihood(const ExactMixture& m, const std::vector<DenseDoc>& docs) {
    BigFloat ll = 0;
    for (const auto& x : docs)
        ll += boost::multiprecision::log(to_big(m.beta[0] * likelihood(m.lambda[0], x) +
                                                m.beta[1] * likelihood(m.lambda[1], x)));
    return ll;
}

// Direct high-precision products of exp(log_lambda); no log-space shortcuts.
inline BigFloat direct_likelihood(const std::vector<double>& log_lambda, const DenseDoc& x) {
    BigFloat p = 1;
    for (std::size_t l = 0; l < x.size(); ++l) {
        const BigFloat lam = boost::multiprecision::exp(BigFloat(log_lambda[l]));
        for (std::uint32_t c = 0; c < x[l]; ++c) p *= lam;
    }
    return p;
}

struct DirectPosterior {
    BigFloat ham;   // unnormalized alpha_h P[x | h]
    BigFloat spam;  // unnormalized alpha_s sum_j beta_j P[x | s, j]
    bool spam_wins() const { return spam > ham; }
    BigFloat posterior_ham() const { return ham / (ham + spam); }
};

inline DirectPosterior direct_posterior(double alpha_h, const std::vector<double>& ham, double alpha_s,
                                        const std::array<double, 2>& beta,
                                        const std::array<const std::vector<double>*, 2>& comps, const DenseDoc& x) {
    DirectPosterior p;
    p.ham = BigFloat(alpha_h) * direct_likelihood(ham, x);
    p.spam = 0;
    for (int j = 0; j < 2; ++j)
        if (beta[j] > 0) p.spam += BigFloat(alpha_s) * BigFloat(beta[j]) * direct_likelihood(*comps[j], x);
    return p;
}

// Brute-force count-and-normalize over expanded token streams.
inline std::vector<double> frequency_estimate(const std::vector<DenseDoc>& docs, std::size_t n, double eps) {
    std::vector<long double> counts(n, 0.0L);
    long double total = 0.0L;
    for (const auto& x : docs) {
        for (std::size_t l = 0; l < n; ++l) {
            for (std::uint32_t c = 0; c < x[l]; ++c) {
                counts[l] += 1.0L;
                total += 1.0L;
            }
        }
    }
    std::vector<double> out(n);
    for (std::size_t l = 0; l < n; ++l)
        out[l] = static_cast<double>((counts[l] + eps) / (total + static_cast<long double>(n) * eps));
    return out;
}

}  // namespace oracle
