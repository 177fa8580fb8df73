#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nbdefense/attack_gen.hpp"
#include "nbdefense/corpus.hpp"
#include "nbdefense/mixture.hpp"
#include "nbdefense/nb_core.hpp"

namespace nbdefense {

std::vector<std::size_t> default_strengths();

struct ExperimentConfig {
    std::filesystem::path train_index;
    std::filesystem::path test_index;
    Scenario scenario = Scenario::Training;
    AttackKind attack = AttackKind::PureHam;
    std::vector<std::size_t> strengths = default_strengths();
    std::optional<std::size_t> max_strength;
    std::uint64_t seed = 1;
    double epsilon = kDefaultEpsilon;
    double em_rel_tol = 1e-6;
    std::size_t em_max_iter = 200;
    double purge_threshold = kDefaultPurgeThreshold;
    bool defense = true;
    std::size_t min_count = 1;
    std::string stemmer = "porter";
    std::string stoplist = "default";
    std::optional<Priors> priors;  // default: training-set proportions
    std::size_t threads = 1;

    // Strengths after the max_strength clip.
    std::vector<std::size_t> effective_strengths() const;
    EmOptions em_options() const { return {em_rel_tol, em_max_iter, epsilon}; }

    // Checks value ranges and strength ordering; with `check_paths`, that both indexes are readable.
    void validate(bool check_paths = true) const;
};

// Known config keys, in documentation order.
const std::vector<std::string>& config_keys();

// Applies one `key = value` setting. Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

// Flat `key = value` lines; `#` starts a comment. Relative index paths resolve against the file.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentData {
    std::size_t vocab_size = 0;
    Docs train_ham;
    Docs train_spam;
    Docs test_ham;
    Docs test_spam;
};

struct LoadedCorpus {
    Vocabulary vocab;
    TextPipeline pipeline;
    ExperimentData data;
};

// Tokenizes both indexes, builds the vocabulary on the training set and vectorizes everything.
LoadedCorpus load_experiment_data(const ExperimentConfig& config);

// Synthetic analog of a two-class corpus: each class puts `core_mass` on its own word set.
// Ham: core on A, rest on B. Spam: core on B, rest on D. A, B, D partition the vocabulary.
struct SyntheticSpec {
    std::size_t vocab_size = 1000;
    std::size_t ham_core_words = 400;
    std::size_t spam_core_words = 400;
    double core_mass = 0.8;
    double zipf_exponent = 0.8;
    std::size_t train_ham = 800;
    std::size_t train_spam = 2000;
    std::size_t test_ham = 1000;
    std::size_t test_spam = 1000;
    std::pair<std::uint32_t, std::uint32_t> ham_length{1, 5};
    std::pair<std::uint32_t, std::uint32_t> spam_length{10, 40};
    std::uint64_t seed = 1;
};

struct SyntheticCorpus {
    NbParams true_ham;
    NbParams true_spam;
    ExperimentData data;
};

SyntheticCorpus make_synthetic(const SyntheticSpec& spec);
// Letters-only token names, sorted so that word i has index i.
Vocabulary synthetic_vocabulary(std::size_t n);

using DecisionFn = std::function<Label(const DocVector&)>;

double evaluate_accuracy(const DecisionFn& classify, std::span<const DocVector> test_ham,
                         std::span<const DocVector> test_spam);

struct IsolationMetrics {
    double isolation_fraction = 1.0;
    std::size_t attacks_as_true_spam = 0;
};

// `purge` is null when the defense was not invoked (BIC chose one component).
IsolationMetrics isolation_metrics(const PurgeResult* purge, const std::vector<bool>& is_attack);

struct SweepRow {
    std::size_t strength = 0;
    double accuracy_standard_nb = 0.0;
    double accuracy_defended = 0.0;
    int bic_selected_order = 1;
    double attack_isolation_fraction = 1.0;
    std::size_t attack_classified_as_true_spam_count = 0;
    std::size_t em_iterations = 0;
    // Diagnostics, not part of the CSV.
    BicComparison bic;
    std::optional<int> discarded_component;
    IsolationReport purge_report;
};

struct SweepResult {
    Scenario scenario = Scenario::Training;
    AttackKind attack = AttackKind::PureHam;
    std::uint64_t seed = 0;
    std::vector<SweepRow> rows;

    // Schema nbdefense-sweep/1: a `#` metadata line, then the header row, then one row per strength.
    void write_csv(std::ostream& out) const;
};

inline constexpr std::string_view kSweepCsvHeader =
    "strength,accuracy_standard_nb,accuracy_defended,bic_selected_order,attack_isolation_fraction,"
    "attack_classified_as_true_spam_count,em_iterations";

// One strength point; `strength` attack emails.
SweepRow run_point(const ExperimentData& data, const ExperimentConfig& config, std::size_t strength);

SweepResult run_retraining(const ExperimentData& data, const ExperimentConfig& config);
SweepResult run_training(const ExperimentData& data, const ExperimentConfig& config);
SweepResult run_sweep(const ExperimentData& data, const ExperimentConfig& config);

// Loads the corpora named in the config and runs the configured scenario.
SweepResult run_retraining(const ExperimentConfig& config);
SweepResult run_training(const ExperimentConfig& config);

}  // namespace nbdefense
