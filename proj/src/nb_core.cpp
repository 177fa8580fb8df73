#include "nbdefense/nb_core.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "nbdefense/error.hpp"

namespace nbdefense {

NbParams NbParams::uniform(std::size_t n, double epsilon) {
    if (n == 0) throw DataError("vocabulary size must be >= 1");
    return {std::vector<double>(n, -std::log(static_cast<double>(n))), epsilon};
}

NbParams NbParams::from_probabilities(std::span<const double> lambda, double epsilon) {
    const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    if (!(total > 0.0)) throw DataError("probability vector has no mass");
    NbParams p;
    p.epsilon = epsilon;
    p.log_lambda.reserve(lambda.size());
    for (double v : lambda) p.log_lambda.push_back(std::log(v / total));
    return p;
}

std::vector<double> NbParams::probabilities() const {
    std::vector<double> out(log_lambda.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_lambda[i]);
    return out;
}

Priors Priors::from_counts(std::size_t n_ham, std::size_t n_spam) {
    if (n_ham == 0 || n_spam == 0) throw DataError("class priors need at least one ham and one spam document");
    const double total = static_cast<double>(n_ham + n_spam);
    return {static_cast<double>(n_ham) / total, static_cast<double>(n_spam) / total};
}

void Priors::validate() const {
    if (!(ham >= 0.0 && ham <= 1.0 && spam >= 0.0 && spam <= 1.0) || std::abs(ham + spam - 1.0) > 1e-12)
        throw ConfigError("class priors must lie in [0,1] and sum to 1");
}

NbParams train_weighted(std::span<const DocVector> docs, std::span<const double> weights, std::size_t n,
                        double epsilon) {
    if (n == 0) throw DataError("vocabulary size must be >= 1");
    if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (!weights.empty() && weights.size() != docs.size()) throw DataError("weight count differs from document count");

    std::vector<double> counts(n, 0.0);
    double total = 0.0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const double w = weights.empty() ? 1.0 : weights[d];
        if (w == 0.0) continue;
        for (const auto& e : docs[d].entries) counts.at(e.index) += w * e.count;
        total += w * static_cast<double>(docs[d].total);
    }
    const double denom = total + static_cast<double>(n) * epsilon;
    if (!(denom > 0.0)) throw DataError("degenerate estimate: no counts and epsilon = 0");

    NbParams p;
    p.epsilon = epsilon;
    p.log_lambda.resize(n);
    const double log_denom = std::log(denom);
    for (std::size_t l = 0; l < n; ++l) {
        const double c = counts[l] + epsilon;
        if (c <= 0.0 && epsilon == 0.0 && weights.empty())
            throw DataError("degenerate estimate: word " + std::to_string(l) + " has zero count and epsilon = 0");
        p.log_lambda[l] = c > 0.0 ? std::log(c) - log_denom : -std::numeric_limits<double>::infinity();
    }
    return p;
}

NbParams train_component(std::span<const DocVector> docs, std::size_t n, double epsilon) {
    return train_weighted(docs, {}, n, epsilon);
}

double log_score(const NbParams& params, const DocVector& doc) {
    double s = 0.0;
    for (const auto& e : doc.entries) s += e.count * params.log_lambda[e.index];
    return s;
}

double log_add(double a, double b) {
    const double m = std::max(a, b);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

namespace {

std::array<double, 2> joint_scores(const NbClassifier& clf, const DocVector& doc) {
    return {std::log(clf.alpha.ham) + log_score(clf.ham, doc), std::log(clf.alpha.spam) + log_score(clf.spam, doc)};
}

double ham_share(double a_ham, double a_spam) {
    const double m = std::max(a_ham, a_spam);
    const double h = std::exp(a_ham - m);
    const double s = std::exp(a_spam - m);
    return h / (h + s);
}

}  // namespace

Decision classify_map(const NbClassifier& clf, const DocVector& doc) {
    const auto [a_ham, a_spam] = joint_scores(clf, doc);
    return {a_spam > a_ham ? Label::Spam : Label::Ham, ham_share(a_ham, a_spam)};
}

double posterior_ham(const NbClassifier& clf, const DocVector& doc) {
    const auto [a_ham, a_spam] = joint_scores(clf, doc);
    return ham_share(a_ham, a_spam);
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError("bad number in model file: '" + s + "'");
    return v;
}

}  // namespace

void write_params(std::ostream& out, const NbParams& params, const Vocabulary& vocab) {
    if (vocab.size() != params.size()) throw DataError("vocabulary size differs from model size");
    out << "nbparams v1 " << params.size() << ' ' << format_double(params.epsilon) << '\n';
    for (std::size_t l = 0; l < params.size(); ++l)
        out << vocab.word(static_cast<WordIndex>(l)) << ' ' << format_double(params.log_lambda[l]) << '\n';
}

NbParams read_params(std::istream& in, const Vocabulary* vocab_check, Vocabulary* vocab_out) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("model file truncated: missing nbparams header");
    std::istringstream header(line);
    std::string tag, version, eps;
    std::size_t n = 0;
    if (!(header >> tag >> version >> n >> eps) || tag != "nbparams" || version != "v1")
        throw DataError("bad nbparams header: '" + line + "'");
    NbParams p;
    p.epsilon = parse_double(eps);
    p.log_lambda.reserve(n);
    std::vector<std::string> words;
    words.reserve(n);
    for (std::size_t l = 0; l < n; ++l) {
        if (!std::getline(in, line)) throw DataError("model file truncated inside nbparams block");
        const auto space = line.rfind(' ');
        if (space == std::string::npos) throw DataError("bad nbparams line: '" + line + "'");
        words.push_back(line.substr(0, space));
        p.log_lambda.push_back(parse_double(line.substr(space + 1)));
        if (vocab_check && vocab_check->word(static_cast<WordIndex>(l)) != words.back())
            throw DataError("model block vocabulary mismatch at word " + std::to_string(l));
    }
    if (vocab_out) *vocab_out = Vocabulary(std::move(words));
    return p;
}

}  // namespace nbdefense
