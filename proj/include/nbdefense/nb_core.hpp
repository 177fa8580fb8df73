#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "nbdefense/corpus.hpp"

namespace nbdefense {

inline constexpr double kDefaultEpsilon = 1e-6;

// One multinomial word distribution, stored as log-probabilities.
struct NbParams {
    std::vector<double> log_lambda;
    double epsilon = kDefaultEpsilon;

    std::size_t size() const noexcept { return log_lambda.size(); }

    static NbParams uniform(std::size_t n, double epsilon = kDefaultEpsilon);
    // Takes ownership of probabilities (not logs); they are normalized here.
    static NbParams from_probabilities(std::span<const double> lambda, double epsilon = kDefaultEpsilon);

    std::vector<double> probabilities() const;
};

struct Priors {
    double ham = 0.5;
    double spam = 0.5;

    // Training-set proportions T_h / (T_h + T_s). Throws DataError if either class is empty.
    static Priors from_counts(std::size_t n_ham, std::size_t n_spam);
    // Throws ConfigError unless ham + spam == 1 with both in [0,1].
    void validate() const;
};

struct NbClassifier {
    Priors alpha;
    NbParams ham;
    NbParams spam;
};

struct Decision {
    Label label;
    double posterior_ham;
};

// lambda_l = (count_l + eps) / (total + N eps). Throws DataError on a degenerate estimate.
NbParams train_component(std::span<const DocVector> docs, std::size_t n, double epsilon = kDefaultEpsilon);

// Same estimate with a per-document weight on the counts.
NbParams train_weighted(std::span<const DocVector> docs, std::span<const double> weights, std::size_t n,
                        double epsilon = kDefaultEpsilon);

// sum_i x_i log lambda_i; the multinomial coefficient is omitted.
double log_score(const NbParams& params, const DocVector& doc);

Decision classify_map(const NbClassifier& clf, const DocVector& doc);
double posterior_ham(const NbClassifier& clf, const DocVector& doc);

// log(exp(a) + exp(b)) without overflow; -inf if both are -inf.
double log_add(double a, double b);

// Text block: `nbparams v1 <N> <epsilon>` then `token log_lambda` per word.
void write_params(std::ostream& out, const NbParams& params, const Vocabulary& vocab);
NbParams read_params(std::istream& in, const Vocabulary* vocab_check = nullptr, Vocabulary* vocab_out = nullptr);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace nbdefense
