#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nbdefense/corpus.hpp"
#include "nbdefense/nb_core.hpp"
#include "nbdefense/rng.hpp"

namespace nbdefense {

enum class AttackKind { PureHam, Truncated };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view text);

struct AttackSpec {
    AttackKind kind = AttackKind::PureHam;
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

struct AttackBatch {
    Docs docs;
    AttackSpec spec;
    std::size_t effective_vocab_size = 0;
};

// Length of a uniformly chosen reference document. Throws DataError if `spam_train` is empty.
std::uint64_t sample_length(std::span<const DocVector> spam_train, Rng& rng);

// Attack emails with spam-matched lengths and words drawn i.i.d. from the ham model.
AttackBatch gen_pure_ham(const NbParams& ham, std::span<const DocVector> spam_train, const AttackSpec& spec);

// Words strictly more likely under ham than spam.
std::vector<WordIndex> truncated_support(const NbParams& ham, const NbParams& spam);

// As gen_pure_ham, with the ham model restricted to truncated_support and renormalized.
AttackBatch gen_truncated(const NbParams& ham, const NbParams& spam, std::span<const DocVector> spam_train,
                          const AttackSpec& spec);

enum class Scenario { Retraining, Training };

std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view text);

// Spam training data after an attack is injected.
struct PoisonedPool {
    Scenario scenario = Scenario::Training;
    // Retraining: clean set and known batch kept apart. Training: `docs` only.
    Docs clean;
    Docs batch;
    // Training: shuffled pool and its ground-truth flags (evaluation only).
    Docs docs;
    std::vector<bool> is_attack;

    // X_sc in a fixed order: clean then batch (retraining) or the shuffled pool (training).
    Docs combined() const;
    std::vector<bool> combined_flags() const;
};

PoisonedPool inject(std::span<const DocVector> clean_spam, const AttackBatch& batch, Scenario scenario, Rng& rng);

// Writes the batch as a corpus directory (label spam) plus a `manifest` for replay.
void export_attack_batch(const std::filesystem::path& dir, const AttackBatch& batch, const Vocabulary& vocab);

}  // namespace nbdefense
