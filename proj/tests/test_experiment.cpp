#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nbdefense/error.hpp"
#include "nbdefense/experiment.hpp"
#include "support/test_util.hpp"

using namespace nbdefense;
using testutil::doc;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec(std::uint64_t seed = 1) {
    SyntheticSpec s;
    s.vocab_size = 300;
    s.ham_core_words = 120;
    s.spam_core_words = 120;
    s.train_ham = 300;
    s.train_spam = 600;
    s.test_ham = 300;
    s.test_spam = 300;
    s.seed = seed;
    return s;
}

ExperimentConfig small_config(std::vector<std::size_t> strengths) {
    ExperimentConfig c;
    c.strengths = std::move(strengths);
    c.seed = 7;
    return c;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream out;
    r.write_csv(out);
    return out.str();
}

}  // namespace

TEST_CASE("evaluate_accuracy examples") {
    const Docs ham(2000, doc({{0, 1}}));
    const Docs spam(1994, doc({{1, 1}}));
    CHECK(evaluate_accuracy([](const DocVector&) { return Label::Ham; }, ham, spam) == 2000.0 / 3994.0);
    CHECK(evaluate_accuracy([](const DocVector& d) { return d.entries[0].index == 1 ? Label::Spam : Label::Ham; },
                            ham, spam) == 1.0);
    CHECK_THROWS_AS(evaluate_accuracy([](const DocVector&) { return Label::Ham; }, Docs{}, Docs{}), DataError);
}

TEST_CASE("evaluate_accuracy matches a confusion-matrix count") {
    std::mt19937_64 gen(5);
    const auto ham = testutil::random_docs(gen, 137, 4, 3);
    const auto spam = testutil::random_docs(gen, 211, 4, 3);
    const DecisionFn rule = [](const DocVector& d) { return d.total % 2 == 0 ? Label::Ham : Label::Spam; };
    std::size_t tp = 0, tn = 0;
    for (const auto& d : ham) tn += d.total % 2 == 0;
    for (const auto& d : spam) tp += d.total % 2 == 1;
    CHECK(evaluate_accuracy(rule, ham, spam) == doctest::Approx(static_cast<double>(tp + tn) / 348.0));
}

TEST_CASE("isolation_metrics conventions") {
    const std::vector<bool> flags{false, true, true, false, true};
    PurgeResult purge;
    purge.assignment = {0, 1, 1, 0, 0};
    purge.attack_component = 1;
    const auto m = isolation_metrics(&purge, flags);
    CHECK(m.isolation_fraction == doctest::Approx(2.0 / 3.0));
    CHECK(m.attacks_as_true_spam == 1);

    // No purge: every attack email stays in the spam model.
    const auto none = isolation_metrics(nullptr, flags);
    CHECK(none.isolation_fraction == 0.0);
    CHECK(none.attacks_as_true_spam == 3);

    purge.attack_component.reset();
    CHECK(isolation_metrics(&purge, flags).attacks_as_true_spam == 3);

    // No attacks: isolation is vacuously complete.
    const auto clean = isolation_metrics(nullptr, std::vector<bool>(4, false));
    CHECK(clean.isolation_fraction == 1.0);
    CHECK(clean.attacks_as_true_spam == 0);

    purge.assignment = {0};
    CHECK_THROWS_AS(isolation_metrics(&purge, flags), DataError);
}

TEST_CASE("config parsing") {
    std::istringstream in(
        "# sweep settings\n"
        "train_index = corpus/train   # relative\n"
        "test_index=/abs/test\n"
        "scenario = retraining\n"
        "attack = truncated\n"
        "strengths = 0, 10, 1e3\n"
        "max_strength = 500\n"
        "seed = 42\n"
        "epsilon = 1e-5\n"
        "defense = false\n"
        "alpha_ham = 0.25\n");
    const auto c = parse_config(in, "/base");
    CHECK(c.train_index == fs::path("/base/corpus/train"));
    CHECK(c.test_index == fs::path("/abs/test"));
    CHECK(c.scenario == Scenario::Retraining);
    CHECK(c.attack == AttackKind::Truncated);
    CHECK(c.strengths == std::vector<std::size_t>{0, 10, 1000});
    CHECK(c.effective_strengths() == std::vector<std::size_t>{0, 10});
    CHECK(c.seed == 42);
    CHECK(c.epsilon == 1e-5);
    CHECK_FALSE(c.defense);
    REQUIRE(c.priors.has_value());
    CHECK(c.priors->spam == 0.75);
    CHECK_NOTHROW(c.validate(false));
}

TEST_CASE("config defaults and errors") {
    const ExperimentConfig d;
    CHECK(d.strengths == std::vector<std::size_t>{0, 1000, 5000, 10000, 20000, 50000, 100000});
    CHECK(d.scenario == Scenario::Training);
    CHECK(d.epsilon == 1e-6);
    CHECK(d.purge_threshold == 0.5);

    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    };
    CHECK_THROWS_AS(parse("colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse("seed 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("seed = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse("epsilon = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("defense = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse("scenario = online\n"), ConfigError);
    CHECK_THROWS_AS(parse("strengths = 10, 5\n").validate(false), ConfigError);
    CHECK_THROWS_AS(parse("purge_threshold = 0\n").validate(false), ConfigError);
    CHECK_THROWS_AS(parse("alpha_ham = 1.5\n").validate(false), ConfigError);
    CHECK_THROWS_AS(parse("").validate(true), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/sweep.conf"), ConfigError);
    CHECK(config_keys().size() == 17);
}

TEST_CASE("synthetic vocabulary is sorted letters") {
    const auto v = synthetic_vocabulary(1000);
    CHECK(v.size() == 1000);
    CHECK(v.word(0) == "waaa");
    CHECK(v.word(1) == "waab");
    CHECK(v.word(27) == "wabb");
    for (WordIndex i = 0; i < v.size(); ++i) {
        const auto t = tokenize(v.word(i), {}, identity_stem);
        REQUIRE(t.size() == 1);
        CHECK(t[0] == v.word(i));
    }
}

TEST_CASE("synthetic corpus has the requested shape") {
    const auto spec = small_spec();
    const auto s = make_synthetic(spec);
    CHECK(s.data.vocab_size == 300);
    CHECK(s.data.train_ham.size() == 300);
    CHECK(s.data.test_spam.size() == 300);
    for (const auto& d : s.data.train_ham) {
        CHECK(d.total >= 1);
        CHECK(d.total <= 5);
    }
    // Ham never uses the spam tail set.
    for (const auto& d : s.data.train_ham)
        for (const auto& e : d.entries) CHECK(e.index < 240);
    CHECK(make_synthetic(spec).data.train_spam == s.data.train_spam);
}

TEST_CASE("strength zero reproduces plain naive Bayes") {
    const auto s = make_synthetic(small_spec());
    const auto cfg = small_config({0});
    const auto row = run_point(s.data, cfg, 0);

    const std::size_t n = s.data.vocab_size;
    const NbClassifier nb{Priors::from_counts(s.data.train_ham.size(), s.data.train_spam.size()),
                          train_component(s.data.train_ham, n), train_component(s.data.train_spam, n)};
    const double expected = evaluate_accuracy([&](const DocVector& d) { return classify_map(nb, d).label; },
                                              s.data.test_ham, s.data.test_spam);
    CHECK(row.accuracy_standard_nb == expected);
    CHECK(row.attack_isolation_fraction == 1.0);
    CHECK(row.attack_classified_as_true_spam_count == 0);
    if (row.bic_selected_order == 1) CHECK(row.accuracy_defended == expected);
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
    const auto s = make_synthetic(small_spec(3));
    auto cfg = small_config({0, 50, 200});
    const auto a = csv_of(run_training(s.data, cfg));
    const auto b = csv_of(run_training(s.data, cfg));
    cfg.threads = 3;
    const auto c = csv_of(run_training(s.data, cfg));
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.rfind("# schema=nbdefense-sweep/1 scenario=training attack=pure_ham seed=7\n", 0) == 0);
    CHECK(a.find(std::string(kSweepCsvHeader) + "\n") != std::string::npos);
    cfg.seed = 8;
    CHECK(csv_of(run_training(s.data, cfg)) != a);
}

TEST_CASE("disabling the defense copies the standard accuracy") {
    const auto s = make_synthetic(small_spec());
    auto cfg = small_config({100});
    cfg.defense = false;
    const auto r = run_training(s.data, cfg).rows.at(0);
    CHECK(r.accuracy_defended == r.accuracy_standard_nb);
    CHECK(r.attack_isolation_fraction == 0.0);
    CHECK(r.attack_classified_as_true_spam_count == 100);
    CHECK(r.em_iterations == 0);
}

TEST_CASE("defense beats standard naive Bayes under a strong attack") {
    const auto s = make_synthetic(small_spec());
    for (auto scenario : {Scenario::Retraining, Scenario::Training}) {
        for (auto attack : {AttackKind::PureHam, AttackKind::Truncated}) {
            auto cfg = small_config({600});
            cfg.attack = attack;
            const auto r = (scenario == Scenario::Retraining ? run_retraining(s.data, cfg) : run_training(s.data, cfg))
                               .rows.at(0);
            CAPTURE(to_string(scenario));
            CAPTURE(to_string(attack));
            CHECK(r.bic_selected_order == 2);
            CHECK(r.accuracy_defended > r.accuracy_standard_nb);
            CHECK(r.attack_isolation_fraction >= 0.95);
        }
    }
}

TEST_CASE("run_training loads corpora named in the config") {
    const auto dir = fs::temp_directory_path() / "nbdefense_test_experiment_corpus";
    fs::remove_all(dir);
    const auto s = make_synthetic(small_spec());
    const auto vocab = synthetic_vocabulary(s.data.vocab_size);
    write_corpus_dir(dir, vocab, s.data.train_ham, s.data.train_spam, "train_index");
    write_corpus_dir(dir, vocab, s.data.test_ham, s.data.test_spam, "test_index");

    auto cfg = small_config({0, 100});
    cfg.train_index = dir / "train_index";
    cfg.test_index = dir / "test_index";
    cfg.stemmer = "none";
    cfg.stoplist = "none";
    const auto loaded = load_experiment_data(cfg);
    // Words that never occur in training drop out of the loaded vocabulary.
    CHECK(loaded.vocab.size() <= vocab.size());
    CHECK(loaded.data.train_spam.size() == s.data.train_spam.size());
    const auto from_files = run_training(cfg);
    CHECK(from_files.rows.size() == 2);
    CHECK(csv_of(from_files) == csv_of(run_training(loaded.data, cfg)));
}
