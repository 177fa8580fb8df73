#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nbdefense/corpus.hpp"
#include "nbdefense/nb_core.hpp"

namespace nbdefense {

// Two-component multinomial mixture for the spam class. Component indices are 0 and 1
// in code; reports and files call them 1 and 2.
struct MixtureParams {
    std::array<double, 2> beta{0.5, 0.5};
    std::array<NbParams, 2> comp;

    std::size_t size() const noexcept { return comp[0].size(); }
    MixtureParams swapped() const { return {{beta[1], beta[0]}, {comp[1], comp[0]}}; }
};

// r[d][j] = P[M = j | x_d, C = s]
using Responsibilities = std::vector<std::array<double, 2>>;

struct EmTrace {
    std::vector<double> log_likelihood;  // entry 0 is the initial model
    std::size_t iterations = 0;
    bool converged = false;

    void write_csv(std::ostream& out) const;
};

struct EmOptions {
    double rel_tol = 1e-6;
    std::size_t max_iter = 200;
    double epsilon = kDefaultEpsilon;
    // Relative slack before a decrease counts as an EM bug.
    double monotone_slack = 1e-9;
};

struct EmResult {
    MixtureParams params;
    EmTrace trace;
};

struct BicComparison {
    double ll_1 = 0.0;
    double ll_2 = 0.0;
    double k_1 = 0.0;
    double k_2 = 0.0;
    double bic_1 = 0.0;
    double bic_2 = 0.0;
    int selected = 1;
};

struct ComponentReport {
    std::size_t docs = 0;        // documents hard-assigned to the component
    double ham_fraction = 0.0;   // share of them the ham model wins against the other component
    double tv_to_ham = 0.0;      // total-variation distance to the ham model
};

struct IsolationReport {
    std::array<ComponentReport, 2> components;
    int candidate = 0;           // component closest to ham
    std::string note;
};

struct PurgeResult {
    NbParams spam_component;
    MixtureParams spam_model;             // retained component with beta = (1, 0), or the full mixture
    std::optional<int> attack_component;  // 0 or 1; nullopt when nothing was discarded
    std::vector<int> assignment;          // hard component per document
    IsolationReport report;
};

struct ExactScores {
    double ham;
    std::array<double, 2> spam;  // log alpha_s + log beta_j + log P[x | s, j]
};

struct ExactDecision {
    Label label;
    ExactScores log_scores;
};

inline constexpr double kDefaultPurgeThreshold = 0.5;

Responsibilities e_step(const MixtureParams& params, std::span<const DocVector> docs);
MixtureParams m_step(const Responsibilities& r, std::span<const DocVector> docs, std::size_t n,
                     double epsilon = kDefaultEpsilon);
double total_log_likelihood(const MixtureParams& params, std::span<const DocVector> docs);

// Throws NumericalError when the likelihood drops by more than the monotone slack.
EmResult run_em(const MixtureParams& init, std::span<const DocVector> docs, const EmOptions& options = {});

// Component 1 from the clean spam set, component 2 from the new batch weighted by P[h | x].
MixtureParams init_retraining(std::span<const DocVector> clean_spam, std::span<const DocVector> new_batch,
                              const NbClassifier& clf, double epsilon = kDefaultEpsilon);
// Component 1 from the pooled (possibly poisoned) spam, component 2 from the ham data.
MixtureParams init_training(std::span<const DocVector> combined_spam, std::span<const DocVector> ham, std::size_t n,
                            double epsilon = kDefaultEpsilon);

BicComparison bic_select(std::span<const DocVector> docs, const NbParams& single, const MixtureParams& mixture);

double total_variation(const NbParams& a, const NbParams& b);

// Finds the component closest to the ham model (total variation) and discards it when more
// than `ham_fraction_threshold` of its documents are MAP-assigned to ham against the other
// component. Empty components have ham fraction 0.
PurgeResult purge_attack_component(const MixtureParams& mixture, const NbParams& ham, std::span<const DocVector> docs,
                                   double ham_fraction_threshold = kDefaultPurgeThreshold);

ExactDecision classify_exact(const NbParams& ham, const Priors& alpha, const MixtureParams& mixture,
                             const DocVector& doc);

// Hard component (0 or 1) of one document: larger responsibility, ties to component 0.
int hard_assign(const std::array<double, 2>& r);

// Spam model after the defense: the full mixture, or one retained component with beta = (1, 0).
struct DefendedClassifier {
    Priors alpha;
    NbParams ham;
    MixtureParams spam;

    Label classify(const DocVector& doc) const { return classify_exact(ham, alpha, spam, doc).label; }
};

// Text block: `mixture v1 <beta1> <beta2>` then two nbparams blocks.
void write_mixture(std::ostream& out, const MixtureParams& mixture, const Vocabulary& vocab);
MixtureParams read_mixture(std::istream& in, const Vocabulary* vocab_check = nullptr);

}  // namespace nbdefense
