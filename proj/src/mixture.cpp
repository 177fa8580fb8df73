#include "nbdefense/mixture.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nbdefense/error.hpp"

namespace nbdefense {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

std::array<double, 2> component_scores(const MixtureParams& params, const DocVector& doc) {
    return {safe_log(params.beta[0]) + log_score(params.comp[0], doc),
            safe_log(params.beta[1]) + log_score(params.comp[1], doc)};
}

}  // namespace

void EmTrace::write_csv(std::ostream& out) const {
    out << "iteration,log_likelihood\n";
    for (std::size_t i = 0; i < log_likelihood.size(); ++i) out << i << ',' << format_double(log_likelihood[i]) << '\n';
}

int hard_assign(const std::array<double, 2>& r) { return r[1] > r[0] ? 1 : 0; }

Responsibilities e_step(const MixtureParams& params, std::span<const DocVector> docs) {
    Responsibilities r(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto a = component_scores(params, docs[d]);
        const double lse = log_add(a[0], a[1]);
        if (lse == kNegInf) {
            r[d] = params.beta;
            continue;
        }
        r[d] = {std::exp(a[0] - lse), std::exp(a[1] - lse)};
    }
    return r;
}

MixtureParams m_step(const Responsibilities& r, std::span<const DocVector> docs, std::size_t n, double epsilon) {
    if (docs.empty()) throw DataError("m_step needs at least one document");
    if (r.size() != docs.size()) throw DataError("responsibility rows differ from document count");
    if (n == 0) throw DataError("vocabulary size must be >= 1");

    MixtureParams out;
    std::array<std::vector<double>, 2> counts{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    std::array<double, 2> mass{0.0, 0.0};
    std::array<double, 2> words{0.0, 0.0};
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (int j = 0; j < 2; ++j) {
            const double w = r[d][j];
            if (w == 0.0) continue;
            mass[j] += w;
            words[j] += w * static_cast<double>(docs[d].total);
            for (const auto& e : docs[d].entries) counts[j][e.index] += w * e.count;
        }
    }
    const double n_docs = static_cast<double>(docs.size());
    out.beta = {mass[0] / n_docs, mass[1] / n_docs};

    for (int j = 0; j < 2; ++j) {
        const double denom = words[j] + static_cast<double>(n) * epsilon;
        if (!(denom > 0.0)) {
            out.comp[j] = NbParams::uniform(n, epsilon);
            continue;
        }
        NbParams& p = out.comp[j];
        p.epsilon = epsilon;
        p.log_lambda.resize(n);
        const double log_denom = std::log(denom);
        for (std::size_t l = 0; l < n; ++l) p.log_lambda[l] = safe_log(counts[j][l] + epsilon) - log_denom;
    }
    return out;
}

double total_log_likelihood(const MixtureParams& params, std::span<const DocVector> docs) {
    double ll = 0.0;
    for (const auto& doc : docs) {
        const auto a = component_scores(params, doc);
        ll += log_add(a[0], a[1]);
    }
    return ll;
}

EmResult run_em(const MixtureParams& init, std::span<const DocVector> docs, const EmOptions& options) {
    if (options.max_iter < 1) throw ConfigError("EM max_iter must be >= 1");
    if (docs.empty()) throw DataError("EM needs at least one document");

    EmResult result{init, {}};
    EmTrace& trace = result.trace;
    double prev = total_log_likelihood(init, docs);
    trace.log_likelihood.push_back(prev);
    const std::size_t n = init.size();

    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        const auto r = e_step(result.params, docs);
        result.params = m_step(r, docs, n, options.epsilon);
        const double ll = total_log_likelihood(result.params, docs);
        trace.log_likelihood.push_back(ll);
        trace.iterations = it;
        if (std::isnan(ll)) throw NumericalError("EM log-likelihood became NaN at iteration " + std::to_string(it));
        if (ll < prev - options.monotone_slack * std::abs(prev)) {
            std::ostringstream msg;
            msg << "non-monotone likelihood at iteration " << it << ": " << format_double(prev) << " -> "
                << format_double(ll);
            throw NumericalError(msg.str());
        }
        const double gain = ll - prev;
        prev = ll;
        if (gain < options.rel_tol * std::abs(ll)) {
            trace.converged = true;
            break;
        }
    }
    return result;
}

MixtureParams init_retraining(std::span<const DocVector> clean_spam, std::span<const DocVector> new_batch,
                              const NbClassifier& clf, double epsilon) {
    if (new_batch.empty()) throw DataError("retraining initialization needs a nonempty new batch");
    const std::size_t n = clf.ham.size();

    std::vector<double> weights;
    weights.reserve(new_batch.size());
    double ham_mass = 0.0;
    for (const auto& doc : new_batch) {
        weights.push_back(posterior_ham(clf, doc));
        ham_mass += weights.back() * static_cast<double>(doc.total);
    }
    if (!(ham_mass + static_cast<double>(n) * epsilon > 0.0)) throw DataError("zero ham mass in new batch");

    MixtureParams init;
    init.beta = {0.5, 0.5};
    init.comp[0] = train_component(clean_spam, n, epsilon);
    init.comp[1] = train_weighted(new_batch, weights, n, epsilon);
    return init;
}

MixtureParams init_training(std::span<const DocVector> combined_spam, std::span<const DocVector> ham, std::size_t n,
                            double epsilon) {
    if (combined_spam.empty() || ham.empty()) throw DataError("training initialization needs nonempty spam and ham");
    MixtureParams init;
    init.beta = {0.5, 0.5};
    init.comp[0] = train_component(combined_spam, n, epsilon);
    init.comp[1] = train_component(ham, n, epsilon);
    return init;
}

BicComparison bic_select(std::span<const DocVector> docs, const NbParams& single, const MixtureParams& mixture) {
    if (docs.empty()) throw DataError("empty corpus: BIC needs at least one document");
    BicComparison cmp;
    for (const auto& doc : docs) cmp.ll_1 += log_score(single, doc);
    cmp.ll_2 = total_log_likelihood(mixture, docs);
    const double n = static_cast<double>(single.size());
    cmp.k_1 = n - 1.0;
    cmp.k_2 = 2.0 * (n - 1.0) + 1.0;
    const double log_docs = std::log(static_cast<double>(docs.size()));
    cmp.bic_1 = -2.0 * cmp.ll_1 + cmp.k_1 * log_docs;
    cmp.bic_2 = -2.0 * cmp.ll_2 + cmp.k_2 * log_docs;
    cmp.selected = cmp.bic_2 < cmp.bic_1 ? 2 : 1;
    return cmp;
}

double total_variation(const NbParams& a, const NbParams& b) {
    if (a.size() != b.size()) throw DataError("total variation: models have different vocabularies");
    double tv = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) tv += std::abs(std::exp(a.log_lambda[l]) - std::exp(b.log_lambda[l]));
    return 0.5 * tv;
}

PurgeResult purge_attack_component(const MixtureParams& mixture, const NbParams& ham, std::span<const DocVector> docs,
                                   double ham_fraction_threshold) {
    if (!(ham_fraction_threshold > 0.0 && ham_fraction_threshold <= 1.0))
        throw ConfigError("purge threshold must lie in (0, 1]");

    const auto r = e_step(mixture, docs);
    PurgeResult result;
    auto& report = result.report;
    result.assignment.resize(docs.size());

    // A document of component j counts as ham when the ham model beats the other
    // component in a two-way MAP with equal priors (ties to ham).
    std::array<std::size_t, 2> ham_wins{0, 0};
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const int j = hard_assign(r[d]);
        result.assignment[d] = j;
        ++report.components[j].docs;
        if (log_score(ham, docs[d]) >= log_score(mixture.comp[1 - j], docs[d])) ++ham_wins[j];
    }
    for (int j = 0; j < 2; ++j) {
        auto& c = report.components[j];
        c.ham_fraction = c.docs == 0 ? 0.0 : static_cast<double>(ham_wins[j]) / static_cast<double>(c.docs);
        c.tv_to_ham = total_variation(mixture.comp[j], ham);
    }

    const int candidate = report.components[1].tv_to_ham < report.components[0].tv_to_ham ? 1 : 0;
    report.candidate = candidate;
    const double fraction = report.components[candidate].ham_fraction;

    if (fraction > ham_fraction_threshold) {
        const int keep = 1 - candidate;
        result.attack_component = candidate;
        result.spam_component = mixture.comp[keep];
        result.spam_model = {{1.0, 0.0}, {mixture.comp[keep], mixture.comp[keep]}};
        report.note = "discarded component " + std::to_string(candidate + 1);
    } else {
        result.spam_component = mixture.comp[mixture.beta[1] > mixture.beta[0] ? 1 : 0];
        result.spam_model = mixture;
        report.note = "component " + std::to_string(candidate + 1) +
                      " is closest to ham but its ham fraction does not exceed the threshold; none discarded";
    }
    return result;
}

ExactDecision classify_exact(const NbParams& ham, const Priors& alpha, const MixtureParams& mixture,
                             const DocVector& doc) {
    ExactDecision out;
    const double log_alpha_s = safe_log(alpha.spam);
    out.log_scores.ham = safe_log(alpha.ham) + log_score(ham, doc);
    for (int j = 0; j < 2; ++j)
        out.log_scores.spam[j] = log_alpha_s + safe_log(mixture.beta[j]) + log_score(mixture.comp[j], doc);
    const double spam = log_add(out.log_scores.spam[0], out.log_scores.spam[1]);
    out.label = spam > out.log_scores.ham ? Label::Spam : Label::Ham;
    return out;
}

void write_mixture(std::ostream& out, const MixtureParams& mixture, const Vocabulary& vocab) {
    out << "mixture v1 " << format_double(mixture.beta[0]) << ' ' << format_double(mixture.beta[1]) << '\n';
    write_params(out, mixture.comp[0], vocab);
    write_params(out, mixture.comp[1], vocab);
}

MixtureParams read_mixture(std::istream& in, const Vocabulary* vocab_check) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("model file truncated: missing mixture header");
    std::istringstream header(line);
    std::string tag, version;
    MixtureParams m;
    if (!(header >> tag >> version >> m.beta[0] >> m.beta[1]) || tag != "mixture" || version != "v1")
        throw DataError("bad mixture header: '" + line + "'");
    m.comp[0] = read_params(in, vocab_check);
    m.comp[1] = read_params(in, vocab_check);
    return m;
}

}  // namespace nbdefense
