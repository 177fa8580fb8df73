#include "nbdefense/attack_gen.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "nbdefense/error.hpp"

namespace nbdefense {

std::string_view to_string(AttackKind kind) { return kind == AttackKind::PureHam ? "pure_ham" : "truncated"; }

AttackKind parse_attack_kind(std::string_view text) {
    if (text == "pure_ham") return AttackKind::PureHam;
    if (text == "truncated") return AttackKind::Truncated;
    throw ConfigError("unknown attack kind '" + std::string(text) + "' (expected pure_ham|truncated)");
}

std::string_view to_string(Scenario scenario) {
    return scenario == Scenario::Retraining ? "retraining" : "training";
}

Scenario parse_scenario(std::string_view text) {
    if (text == "retraining") return Scenario::Retraining;
    if (text == "training") return Scenario::Training;
    throw ConfigError("unknown scenario '" + std::string(text) + "' (expected retraining|training)");
}

std::uint64_t sample_length(std::span<const DocVector> spam_train, Rng& rng) {
    if (spam_train.empty()) throw DataError("empty reference corpus: cannot sample attack lengths");
    return spam_train[static_cast<std::size_t>(rng.below(spam_train.size()))].total;
}

namespace {

AttackBatch sample_batch(const AliasTable& table, std::span<const WordIndex> support,
                         std::span<const DocVector> spam_train, const AttackSpec& spec) {
    if (spec.count > 0 && spam_train.empty()) throw DataError("empty reference corpus: cannot sample attack lengths");
    AttackBatch batch;
    batch.spec = spec;
    batch.effective_vocab_size = support.size();
    batch.docs.reserve(spec.count);
    Rng rng(spec.seed);
    std::map<WordIndex, std::uint32_t> counts;
    for (std::size_t i = 0; i < spec.count; ++i) {
        const auto length = sample_length(spam_train, rng);
        counts.clear();
        for (std::uint64_t w = 0; w < length; ++w) ++counts[support[table.sample(rng)]];
        batch.docs.push_back(DocVector::from_counts(counts));
    }
    return batch;
}

}  // namespace

AttackBatch gen_pure_ham(const NbParams& ham, std::span<const DocVector> spam_train, const AttackSpec& spec) {
    if (spec.kind != AttackKind::PureHam) throw ConfigError("gen_pure_ham called with a non pure_ham spec");
    const auto weights = ham.probabilities();
    std::vector<WordIndex> support(weights.size());
    for (std::size_t l = 0; l < support.size(); ++l) support[l] = static_cast<WordIndex>(l);
    return sample_batch(AliasTable(weights), support, spam_train, spec);
}

std::vector<WordIndex> truncated_support(const NbParams& ham, const NbParams& spam) {
    if (ham.size() != spam.size()) throw DataError("ham and spam models have different vocabularies");
    std::vector<WordIndex> support;
    for (std::size_t l = 0; l < ham.size(); ++l)
        if (ham.log_lambda[l] > spam.log_lambda[l]) support.push_back(static_cast<WordIndex>(l));
    return support;
}

AttackBatch gen_truncated(const NbParams& ham, const NbParams& spam, std::span<const DocVector> spam_train,
                          const AttackSpec& spec) {
    if (spec.kind != AttackKind::Truncated) throw ConfigError("gen_truncated called with a non truncated spec");
    const auto support = truncated_support(ham, spam);
    if (support.empty()) throw DataError("empty truncated support: no word is more likely under ham than spam");
    std::vector<double> weights;
    weights.reserve(support.size());
    for (auto l : support) weights.push_back(std::exp(ham.log_lambda[l]));
    return sample_batch(AliasTable(weights), support, spam_train, spec);
}

Docs PoisonedPool::combined() const {
    if (scenario == Scenario::Training) return docs;
    Docs out(clean);
    out.insert(out.end(), batch.begin(), batch.end());
    return out;
}

std::vector<bool> PoisonedPool::combined_flags() const {
    if (scenario == Scenario::Training) return is_attack;
    std::vector<bool> flags(clean.size(), false);
    flags.resize(clean.size() + batch.size(), true);
    return flags;
}

PoisonedPool inject(std::span<const DocVector> clean_spam, const AttackBatch& batch, Scenario scenario, Rng& rng) {
    PoisonedPool pool;
    pool.scenario = scenario;
    if (scenario == Scenario::Retraining) {
        pool.clean.assign(clean_spam.begin(), clean_spam.end());
        pool.batch = batch.docs;
        return pool;
    }
    struct Tagged {
        const DocVector* doc;
        bool attack;
    };
    std::vector<Tagged> items;
    items.reserve(clean_spam.size() + batch.docs.size());
    for (const auto& d : clean_spam) items.push_back({&d, false});
    for (const auto& d : batch.docs) items.push_back({&d, true});
    rng.shuffle(std::span<Tagged>(items));
    pool.docs.reserve(items.size());
    pool.is_attack.reserve(items.size());
    for (const auto& t : items) {
        pool.docs.push_back(*t.doc);
        pool.is_attack.push_back(t.attack);
    }
    return pool;
}

void export_attack_batch(const std::filesystem::path& dir, const AttackBatch& batch, const Vocabulary& vocab) {
    write_corpus_dir(dir, vocab, {}, batch.docs);
    std::ofstream manifest(dir / "manifest", std::ios::binary);
    if (!manifest) throw DataError("cannot write manifest in " + dir.string());
    manifest << "kind " << to_string(batch.spec.kind) << '\n'
             << "count " << batch.spec.count << '\n'
             << "seed " << batch.spec.seed << '\n'
             << "effective_vocab_size " << batch.effective_vocab_size << '\n';
}

}  // namespace nbdefense
