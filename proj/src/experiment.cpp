#include "nbdefense/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

#include "nbdefense/error.hpp"
#include "nbdefense/rng.hpp"

namespace nbdefense {

namespace fs = std::filesystem;

std::vector<std::size_t> default_strengths() { return {0, 1000, 5000, 10000, 20000, 50000, 100000}; }

std::vector<std::size_t> ExperimentConfig::effective_strengths() const {
    std::vector<std::size_t> out;
    for (auto s : strengths)
        if (!max_strength || s <= *max_strength) out.push_back(s);
    return out;
}

void ExperimentConfig::validate(bool check_paths) const {
    if (strengths.empty()) throw ConfigError("strengths must not be empty");
    if (!std::is_sorted(strengths.begin(), strengths.end())) throw ConfigError("strengths must be sorted ascending");
    if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (!(em_rel_tol >= 0.0)) throw ConfigError("em_rel_tol must be >= 0");
    if (em_max_iter < 1) throw ConfigError("em_max_iter must be >= 1");
    if (!(purge_threshold > 0.0 && purge_threshold <= 1.0)) throw ConfigError("purge_threshold must lie in (0, 1]");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (priors) priors->validate();
    if (check_paths) {
        for (const auto* p : {&train_index, &test_index}) {
            if (p->empty()) throw ConfigError("train_index and test_index are required");
            std::ifstream probe(*p);
            if (!probe) throw ConfigError("index not readable: " + p->string());
        }
    }
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "train_index", "test_index",    "scenario",  "attack",   "strengths", "max_strength",
        "seed",        "epsilon",       "em_rel_tol", "em_max_iter", "purge_threshold", "defense",
        "min_count",   "stemmer",       "stoplist",  "alpha_ham", "threads"};
    return keys;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    return v;
}

std::uint64_t to_count(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec == std::errc() && ptr == value.data() + value.size()) return v;
    // Accept integral reals such as 1e5.
    const double d = to_real(key, value);
    if (d < 0.0 || d != std::floor(d) || d > 1e18) throw ConfigError(key + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw ConfigError(key + ": expected true|false, got '" + value + "'");
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "train_index") {
        c.train_index = value;
    } else if (key == "test_index") {
        c.test_index = value;
    } else if (key == "scenario") {
        c.scenario = parse_scenario(value);
    } else if (key == "attack") {
        c.attack = parse_attack_kind(value);
    } else if (key == "strengths") {
        c.strengths.clear();
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = trim(item);
            if (!item.empty()) c.strengths.push_back(to_count(key, item));
        }
    } else if (key == "max_strength") {
        if (value == "none") {
            c.max_strength.reset();
        } else {
            c.max_strength = to_count(key, value);
        }
    } else if (key == "seed") {
        c.seed = to_count(key, value);
    } else if (key == "epsilon") {
        c.epsilon = to_real(key, value);
    } else if (key == "em_rel_tol") {
        c.em_rel_tol = to_real(key, value);
    } else if (key == "em_max_iter") {
        c.em_max_iter = to_count(key, value);
    } else if (key == "purge_threshold") {
        c.purge_threshold = to_real(key, value);
    } else if (key == "defense") {
        c.defense = to_bool(key, value);
    } else if (key == "min_count") {
        c.min_count = to_count(key, value);
    } else if (key == "stemmer") {
        c.stemmer = value;
    } else if (key == "stoplist") {
        c.stoplist = value;
    } else if (key == "alpha_ham") {
        if (value == "auto") {
            c.priors.reset();
        } else {
            const double h = to_real(key, value);
            c.priors = Priors{h, 1.0 - h};
        }
    } else if (key == "threads") {
        c.threads = to_count(key, value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config(std::istream& in, const fs::path& base_dir) {
    ExperimentConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        apply_setting(c, key, line.substr(eq + 1));
    }
    for (auto* p : {&c.train_index, &c.test_index})
        if (!p->empty() && p->is_relative() && !base_dir.empty()) *p = base_dir / *p;
    if (c.stoplist != "none" && c.stoplist != "default" && fs::path(c.stoplist).is_relative() && !base_dir.empty())
        c.stoplist = (base_dir / c.stoplist).string();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path.string());
    return parse_config(in, path.parent_path());
}

LoadedCorpus load_experiment_data(const ExperimentConfig& config) {
    LoadedCorpus out;
    out.pipeline = TextPipeline::make(config.stemmer, config.stoplist);
    const auto train = load_tokenized(config.train_index, out.pipeline);
    const auto test = load_tokenized(config.test_index, out.pipeline);
    if (train.ham.empty() || train.spam.empty()) throw DataError("training index needs both ham and spam emails");
    if (test.ham.empty() && test.spam.empty()) throw DataError("test index is empty");

    std::vector<Tokens> all(train.ham);
    all.insert(all.end(), train.spam.begin(), train.spam.end());
    out.vocab = build_vocabulary(all, config.min_count);

    auto train_vec = vectorize_corpus(train, out.vocab);
    auto test_vec = vectorize_corpus(test, out.vocab);
    out.data.vocab_size = out.vocab.size();
    out.data.train_ham = std::move(train_vec.ham);
    out.data.train_spam = std::move(train_vec.spam);
    out.data.test_ham = std::move(test_vec.ham);
    out.data.test_spam = std::move(test_vec.spam);
    return out;
}

Vocabulary synthetic_vocabulary(std::size_t n) {
    std::size_t width = 1;
    for (std::size_t cap = 26; cap < n; cap *= 26) ++width;
    std::vector<std::string> words;
    words.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string w(width + 1, 'a');
        w[0] = 'w';
        std::size_t v = i;
        for (std::size_t k = 0; k < width; ++k) {
            w[width - k] = static_cast<char>('a' + v % 26);
            v /= 26;
        }
        words.push_back(std::move(w));
    }
    return Vocabulary(std::move(words));
}

SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
    const std::size_t n = spec.vocab_size;
    if (spec.ham_core_words + spec.spam_core_words >= n)
        throw ConfigError("synthetic word sets leave no room for the spam tail set");
    if (!(spec.core_mass > 0.0 && spec.core_mass <= 1.0)) throw ConfigError("core_mass must lie in (0, 1]");

    Rng rng(spec.seed);
    auto zipf_into = [&](std::vector<double>& lambda, std::size_t begin, std::size_t end, double mass) {
        std::vector<double> w(end - begin);
        for (std::size_t r = 0; r < w.size(); ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
        rng.shuffle(std::span<double>(w));
        double total = 0.0;
        for (double v : w) total += v;
        for (std::size_t r = 0; r < w.size(); ++r) lambda[begin + r] += mass * w[r] / total;
    };

    const std::size_t a_end = spec.ham_core_words;
    const std::size_t b_end = a_end + spec.spam_core_words;
    std::vector<double> ham(n, 0.0), spam(n, 0.0);
    zipf_into(ham, 0, a_end, spec.core_mass);
    zipf_into(ham, a_end, b_end, 1.0 - spec.core_mass);
    zipf_into(spam, a_end, b_end, spec.core_mass);
    zipf_into(spam, b_end, n, 1.0 - spec.core_mass);

    const AliasTable ham_table(ham), spam_table(spam);
    auto draw = [&](const AliasTable& table, std::pair<std::uint32_t, std::uint32_t> lengths, std::size_t count) {
        Docs docs;
        docs.reserve(count);
        std::vector<std::uint32_t> dense(n);
        for (std::size_t i = 0; i < count; ++i) {
            const auto span = static_cast<std::uint64_t>(lengths.second - lengths.first) + 1;
            const auto length = lengths.first + rng.below(span);
            std::fill(dense.begin(), dense.end(), 0u);
            for (std::uint64_t w = 0; w < length; ++w) ++dense[table.sample(rng)];
            docs.push_back(DocVector::from_dense(dense));
        }
        return docs;
    };

    SyntheticCorpus out;
    out.true_ham = NbParams::from_probabilities(ham, 0.0);
    out.true_spam = NbParams::from_probabilities(spam, 0.0);
    out.data.vocab_size = n;
    out.data.train_ham = draw(ham_table, spec.ham_length, spec.train_ham);
    out.data.train_spam = draw(spam_table, spec.spam_length, spec.train_spam);
    out.data.test_ham = draw(ham_table, spec.ham_length, spec.test_ham);
    out.data.test_spam = draw(spam_table, spec.spam_length, spec.test_spam);
    return out;
}

double evaluate_accuracy(const DecisionFn& classify, std::span<const DocVector> test_ham,
                         std::span<const DocVector> test_spam) {
    const std::size_t total = test_ham.size() + test_spam.size();
    if (total == 0) throw DataError("accuracy needs at least one test document");
    std::size_t correct = 0;
    for (const auto& d : test_ham) correct += classify(d) == Label::Ham;
    for (const auto& d : test_spam) correct += classify(d) == Label::Spam;
    return static_cast<double>(correct) / static_cast<double>(total);
}

IsolationMetrics isolation_metrics(const PurgeResult* purge, const std::vector<bool>& is_attack) {
    IsolationMetrics m;
    const auto attacks = static_cast<std::size_t>(std::count(is_attack.begin(), is_attack.end(), true));
    if (attacks == 0) return m;
    if (purge && purge->assignment.size() != is_attack.size())
        throw DataError("isolation metrics: assignment and flags differ in length");
    std::size_t isolated = 0;
    for (std::size_t d = 0; d < is_attack.size(); ++d) {
        if (!is_attack[d]) continue;
        if (purge && purge->attack_component && purge->assignment[d] == *purge->attack_component) {
            ++isolated;
        } else {
            ++m.attacks_as_true_spam;
        }
    }
    m.isolation_fraction = static_cast<double>(isolated) / static_cast<double>(attacks);
    return m;
}

namespace {

AttackBatch make_attack(const ExperimentData& data, const ExperimentConfig& config, const NbParams& ham,
                        std::size_t strength) {
    AttackSpec spec{config.attack, strength, derive_seed(config.seed, 2 * static_cast<std::uint64_t>(strength))};
    if (config.attack == AttackKind::PureHam) return gen_pure_ham(ham, data.train_spam, spec);
    const auto clean_spam = train_component(data.train_spam, data.vocab_size, config.epsilon);
    return gen_truncated(ham, clean_spam, data.train_spam, spec);
}

Priors pool_priors(const ExperimentConfig& config, std::size_t n_ham, std::size_t n_spam) {
    return config.priors ? *config.priors : Priors::from_counts(n_ham, n_spam);
}

struct DefenseOutcome {
    DefendedClassifier classifier;
    int order = 1;
    std::size_t em_iterations = 0;
    BicComparison bic;
    std::optional<PurgeResult> purge;
};

DefenseOutcome defend(const MixtureParams& init, const Docs& pooled, const NbParams& ham, const NbParams& single,
                      const Priors& alpha, const ExperimentConfig& config) {
    DefenseOutcome out;
    const auto em = run_em(init, pooled, config.em_options());
    out.em_iterations = em.trace.iterations;
    out.bic = bic_select(pooled, single, em.params);
    out.order = out.bic.selected;
    out.classifier.alpha = alpha;
    out.classifier.ham = ham;
    if (out.order == 2) {
        out.purge = purge_attack_component(em.params, ham, pooled, config.purge_threshold);
        out.classifier.spam = out.purge->spam_model;
    } else {
        out.classifier.spam = {{1.0, 0.0}, {single, single}};
    }
    return out;
}

SweepRow evaluate_point(const ExperimentData& data, const ExperimentConfig& config, std::size_t strength,
                        const PoisonedPool& pool, const NbParams& ham, const MixtureParams* init_override) {
    const std::size_t n = data.vocab_size;
    const Docs pooled = pool.combined();
    const auto flags = pool.combined_flags();
    const Priors alpha = pool_priors(config, data.train_ham.size(), pooled.size());

    SweepRow row;
    row.strength = strength;
    const NbClassifier standard{alpha, ham, train_component(pooled, n, config.epsilon)};
    row.accuracy_standard_nb = evaluate_accuracy([&](const DocVector& d) { return classify_map(standard, d).label; },
                                                 data.test_ham, data.test_spam);

    if (!config.defense) {
        row.accuracy_defended = row.accuracy_standard_nb;
        row.attack_isolation_fraction = isolation_metrics(nullptr, flags).isolation_fraction;
        row.attack_classified_as_true_spam_count = isolation_metrics(nullptr, flags).attacks_as_true_spam;
        return row;
    }

    const MixtureParams init = init_override ? *init_override : init_training(pooled, data.train_ham, n, config.epsilon);
    const auto outcome = defend(init, pooled, ham, standard.spam, alpha, config);
    row.accuracy_defended = evaluate_accuracy([&](const DocVector& d) { return outcome.classifier.classify(d); },
                                              data.test_ham, data.test_spam);
    row.bic_selected_order = outcome.order;
    row.bic = outcome.bic;
    row.em_iterations = outcome.em_iterations;
    const auto iso = isolation_metrics(outcome.purge ? &*outcome.purge : nullptr, flags);
    row.attack_isolation_fraction = iso.isolation_fraction;
    row.attack_classified_as_true_spam_count = iso.attacks_as_true_spam;
    if (outcome.purge) {
        row.discarded_component = outcome.purge->attack_component;
        row.purge_report = outcome.purge->report;
    }
    return row;
}

SweepRow run_training_point(const ExperimentData& data, const ExperimentConfig& config, std::size_t strength) {
    const auto ham = train_component(data.train_ham, data.vocab_size, config.epsilon);
    const auto batch = make_attack(data, config, ham, strength);
    Rng shuffle_rng(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(strength) + 1));
    const auto pool = inject(data.train_spam, batch, Scenario::Training, shuffle_rng);
    return evaluate_point(data, config, strength, pool, ham, nullptr);
}

SweepRow run_retraining_point(const ExperimentData& data, const ExperimentConfig& config, std::size_t strength) {
    const std::size_t n = data.vocab_size;
    const auto ham = train_component(data.train_ham, n, config.epsilon);
    const NbClassifier clean{pool_priors(config, data.train_ham.size(), data.train_spam.size()), ham,
                             train_component(data.train_spam, n, config.epsilon)};
    const auto batch = make_attack(data, config, ham, strength);
    Rng unused(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(strength) + 1));
    const auto pool = inject(data.train_spam, batch, Scenario::Retraining, unused);

    MixtureParams init;
    if (!batch.docs.empty()) {
        init = init_retraining(data.train_spam, batch.docs, clean, config.epsilon);
    } else {
        init = {{0.5, 0.5}, {clean.spam, ham}};
    }
    return evaluate_point(data, config, strength, pool, ham, &init);
}

SweepResult run_all(const ExperimentData& data, const ExperimentConfig& config, Scenario scenario) {
    config.validate(false);
    if (data.vocab_size == 0 || data.train_ham.empty() || data.train_spam.empty())
        throw DataError("experiment needs a vocabulary and nonempty ham and spam training sets");

    SweepResult result{scenario, config.attack, config.seed, {}};
    const auto strengths = config.effective_strengths();
    auto point = [&](std::size_t s) {
        return scenario == Scenario::Retraining ? run_retraining_point(data, config, s)
                                                : run_training_point(data, config, s);
    };
    if (config.threads <= 1) {
        for (auto s : strengths) result.rows.push_back(point(s));
        return result;
    }
    // Points are independent; results are gathered in strength order.
    for (std::size_t begin = 0; begin < strengths.size(); begin += config.threads) {
        const std::size_t end = std::min(strengths.size(), begin + config.threads);
        std::vector<std::future<SweepRow>> futures;
        for (std::size_t i = begin; i < end; ++i)
            futures.push_back(std::async(std::launch::async, point, strengths[i]));
        for (auto& f : futures) result.rows.push_back(f.get());
    }
    return result;
}

}  // namespace

SweepRow run_point(const ExperimentData& data, const ExperimentConfig& config, std::size_t strength) {
    return config.scenario == Scenario::Retraining ? run_retraining_point(data, config, strength)
                                                   : run_training_point(data, config, strength);
}

SweepResult run_retraining(const ExperimentData& data, const ExperimentConfig& config) {
    return run_all(data, config, Scenario::Retraining);
}

SweepResult run_training(const ExperimentData& data, const ExperimentConfig& config) {
    return run_all(data, config, Scenario::Training);
}

SweepResult run_sweep(const ExperimentData& data, const ExperimentConfig& config) {
    return run_all(data, config, config.scenario);
}

SweepResult run_retraining(const ExperimentConfig& config) {
    config.validate();
    return run_retraining(load_experiment_data(config).data, config);
}

SweepResult run_training(const ExperimentConfig& config) {
    config.validate();
    return run_training(load_experiment_data(config).data, config);
}

void SweepResult::write_csv(std::ostream& out) const {
    out << "# schema=nbdefense-sweep/1 scenario=" << to_string(scenario) << " attack=" << to_string(attack)
        << " seed=" << seed << '\n';
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.strength << ',' << format_double(r.accuracy_standard_nb) << ',' << format_double(r.accuracy_defended)
            << ',' << r.bic_selected_order << ',' << format_double(r.attack_isolation_fraction) << ','
            << r.attack_classified_as_true_spam_count << ',' << r.em_iterations << '\n';
    }
}

}  // namespace nbdefense
