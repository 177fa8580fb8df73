// nbdefense: naive Bayes spam filter with a mixture-model defense against poisoning.
//
//   nbdefense train       fit ham model + defended spam model, write a model file
//   nbdefense attack-gen  emit an attack batch as a corpus directory with a manifest
//   nbdefense sweep       run an attack-strength sweep and write CSV
//   nbdefense classify    label emails with a saved model
//   nbdefense synth       write a synthetic corpus and a sweep config for it
//
// Exit codes: 0 ok, 1 config error, 2 data error, 3 numerical-invariant violation.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "nbdefense/attack_gen.hpp"
#include "nbdefense/error.hpp"
#include "nbdefense/experiment.hpp"
#include "nbdefense/mixture.hpp"
#include "nbdefense/model_file.hpp"

namespace fs = std::filesystem;
using namespace nbdefense;

namespace {

struct ConfigArgs {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("-c,--config", args.config_file, "Experiment config file (key = value lines)");
    for (const auto& key : config_keys()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        cmd->add_option("--" + flag, args.overrides[key], "Override config key '" + key + "'");
    }
}

ExperimentConfig resolve_config(CLI::App* cmd, const ConfigArgs& args) {
    ExperimentConfig config = args.config_file.empty() ? ExperimentConfig{} : load_config(args.config_file);
    for (const auto& key : config_keys()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (cmd->count("--" + flag) > 0) apply_setting(config, key, args.overrides.at(key));
    }
    return config;
}

int cmd_train(CLI::App* cmd, const ConfigArgs& args, const std::string& out, const std::string& trace_out,
              const std::string& vocab_out) {
    ExperimentConfig config = resolve_config(cmd, args);
    if (config.train_index.empty()) throw ConfigError("train needs --train-index (or train_index in the config)");
    config.validate(false);

    const auto pipeline = TextPipeline::make(config.stemmer, config.stoplist);
    const auto train = load_tokenized(config.train_index, pipeline);
    if (train.ham.empty() || train.spam.empty()) throw DataError("training index needs both ham and spam emails");
    std::vector<Tokens> all(train.ham);
    all.insert(all.end(), train.spam.begin(), train.spam.end());
    const auto vocab = build_vocabulary(all, config.min_count);
    const auto corpus = vectorize_corpus(train, vocab);
    const std::size_t n = vocab.size();

    FilterModel model;
    model.stemmer = config.stemmer;
    model.stoplist = config.stoplist;
    model.vocab = vocab;
    model.classifier.alpha = config.priors ? *config.priors : Priors::from_counts(corpus.ham.size(), corpus.spam.size());
    model.classifier.ham = train_component(corpus.ham, n, config.epsilon);
    const auto single = train_component(corpus.spam, n, config.epsilon);
    model.classifier.spam = {{1.0, 0.0}, {single, single}};

    std::cout << "vocabulary " << n << " words; ham " << corpus.ham.size() << ", spam " << corpus.spam.size() << '\n';
    if (config.defense) {
        const auto init = init_training(corpus.spam, corpus.ham, n, config.epsilon);
        const auto em = run_em(init, corpus.spam, config.em_options());
        const auto bic = bic_select(corpus.spam, single, em.params);
        std::cout << "em iterations " << em.trace.iterations << (em.trace.converged ? " (converged)" : "") << '\n'
                  << "bic order1 " << format_double(bic.bic_1) << " order2 " << format_double(bic.bic_2)
                  << " selected " << bic.selected << '\n';
        model.order = bic.selected;
        if (bic.selected == 2) {
            const auto purge = purge_attack_component(em.params, model.classifier.ham, corpus.spam, config.purge_threshold);
            for (int j = 0; j < 2; ++j)
                std::cout << "component " << j + 1 << ": docs " << purge.report.components[j].docs << ", ham fraction "
                          << format_double(purge.report.components[j].ham_fraction) << '\n';
            std::cout << purge.report.note << '\n';
            model.classifier.spam = purge.spam_model;
        }
        if (!trace_out.empty()) {
            std::ofstream t(trace_out, std::ios::binary);
            if (!t) throw DataError("cannot write trace: " + trace_out);
            em.trace.write_csv(t);
        }
    }
    save_model(out, model);
    if (!vocab_out.empty()) vocab.save(vocab_out);
    return 0;
}

int cmd_attack_gen(CLI::App* cmd, const ConfigArgs& args, std::size_t count, std::optional<std::uint64_t> seed,
                   const std::string& out) {
    ExperimentConfig config = resolve_config(cmd, args);
    if (config.train_index.empty()) throw ConfigError("attack-gen needs --train-index (or train_index in the config)");
    config.validate(false);
    const auto pipeline = TextPipeline::make(config.stemmer, config.stoplist);
    const auto train = load_tokenized(config.train_index, pipeline);
    std::vector<Tokens> all(train.ham);
    all.insert(all.end(), train.spam.begin(), train.spam.end());
    const auto vocab = build_vocabulary(all, config.min_count);
    const auto corpus = vectorize_corpus(train, vocab);
    if (corpus.ham.empty() || corpus.spam.empty()) throw DataError("training index needs both ham and spam emails");

    const auto ham = train_component(corpus.ham, vocab.size(), config.epsilon);
    const AttackSpec spec{config.attack, count, seed.value_or(config.seed)};
    const auto batch = config.attack == AttackKind::PureHam
                           ? gen_pure_ham(ham, corpus.spam, spec)
                           : gen_truncated(ham, train_component(corpus.spam, vocab.size(), config.epsilon),
                                           corpus.spam, spec);
    export_attack_batch(out, batch, vocab);
    std::cout << "wrote " << batch.docs.size() << " " << to_string(spec.kind) << " attack emails to " << out
              << " (effective vocabulary " << batch.effective_vocab_size << ")\n";
    return 0;
}

int cmd_sweep(CLI::App* cmd, const ConfigArgs& args, const std::string& out) {
    const ExperimentConfig config = resolve_config(cmd, args);
    config.validate();
    const auto loaded = load_experiment_data(config);
    const auto result = run_sweep(loaded.data, config);
    if (out.empty() || out == "-") {
        result.write_csv(std::cout);
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw DataError("cannot write results: " + out);
        result.write_csv(f);
    }
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& dir, const std::string& index) {
    const auto model = load_model(model_path);
    const auto pipeline = TextPipeline::make(model.stemmer, model.stoplist);

    auto label_one = [&](const fs::path& path) {
        const auto doc = vectorize(pipeline(read_text_file(path)), model.vocab);
        const auto d = classify_exact(model.classifier.ham, model.classifier.alpha, model.classifier.spam, doc);
        const double margin = log_add(d.log_scores.spam[0], d.log_scores.spam[1]) - d.log_scores.ham;
        std::cout << path.string() << '\t' << to_string(d.label) << '\t' << format_double(margin) << '\n';
        return d.label;
    };

    if (!index.empty()) {
        std::size_t correct = 0, total = 0;
        for (const auto& e : read_index(index)) {
            correct += label_one(e.path) == e.label;
            ++total;
        }
        if (total > 0)
            std::cerr << "accuracy " << format_double(static_cast<double>(correct) / static_cast<double>(total))
                      << " (" << correct << "/" << total << ")\n";
        return 0;
    }
    if (dir.empty()) throw ConfigError("classify needs --dir or --index");
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) label_one(f);
    return 0;
}

int cmd_synth(const std::string& out, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const auto synth = make_synthetic(spec);
    const auto vocab = synthetic_vocabulary(spec.vocab_size);
    write_corpus_dir(out, vocab, synth.data.train_ham, synth.data.train_spam, "train_index");
    write_corpus_dir(out, vocab, synth.data.test_ham, synth.data.test_spam, "test_index");
    std::ofstream conf(fs::path(out) / "sweep.conf", std::ios::binary);
    conf << "# synthetic corpus written by `nbdefense synth`\n"
         << "train_index = train_index\n"
         << "test_index = test_index\n"
         << "stemmer = none\n"
         << "stoplist = none\n"
         << "scenario = training\n"
         << "attack = pure_ham\n"
         << "strengths = 0, 200, 500, 1000\n"
         << "seed = " << seed << '\n';
    std::cout << "wrote synthetic corpus to " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Naive Bayes spam filtering with a mixture-model poisoning defense"};
    app.require_subcommand(1);

    ConfigArgs train_args, attack_args, sweep_args;
    std::string model_out, trace_out, vocab_out;
    auto* train = app.add_subcommand("train", "Fit ham and (defended) spam models and write a model file");
    add_config_options(train, train_args);
    train->add_option("-o,--out", model_out, "Model file to write")->required();
    train->add_option("--trace", trace_out, "Write the EM trace as CSV");
    train->add_option("--vocab-out", vocab_out, "Write the vocabulary (one token per line)");

    std::size_t attack_count = 0;
    std::optional<std::uint64_t> attack_seed;
    std::string attack_out;
    auto* attack = app.add_subcommand("attack-gen", "Generate an attack batch as a corpus directory");
    add_config_options(attack, attack_args);
    attack->add_option("-n,--count", attack_count, "Number of attack emails")->required();
    attack->add_option("--attack-seed", attack_seed, "Seed for this batch (default: config seed)");
    attack->add_option("-o,--out", attack_out, "Output directory")->required();

    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Run an attack-strength sweep and write CSV");
    add_config_options(sweep, sweep_args);
    sweep->add_option("-o,--out", sweep_out, "CSV output file (default: stdout)");

    std::string model_in, classify_dir, classify_index;
    auto* classify = app.add_subcommand("classify", "Label emails with a saved model");
    classify->add_option("-m,--model", model_in, "Model file from `train`")->required();
    auto* dir_opt = classify->add_option("-d,--dir", classify_dir, "Directory of plain-text emails");
    auto* index_opt = classify->add_option("-i,--index", classify_index, "Labelled index file (reports accuracy)");
    dir_opt->excludes(index_opt);

    std::string synth_out;
    std::uint64_t synth_seed = 1;
    auto* synth = app.add_subcommand("synth", "Write a synthetic two-class corpus and a sweep config");
    synth->add_option("-o,--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train) return cmd_train(train, train_args, model_out, trace_out, vocab_out);
        if (*attack) return cmd_attack_gen(attack, attack_args, attack_count, attack_seed, attack_out);
        if (*sweep) return cmd_sweep(sweep, sweep_args, sweep_out);
        if (*classify) return cmd_classify(model_in, classify_dir, classify_index);
        if (*synth) return cmd_synth(synth_out, synth_seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Data);
    }
    return 0;
}
