#pragma once

#include <filesystem>
#include <iosfwd>

#include "nbdefense/corpus.hpp"
#include "nbdefense/mixture.hpp"
#include "nbdefense/nb_core.hpp"

namespace nbdefense {

// Everything `classify` needs: tokenizer settings, vocabulary, priors and both class models.
//
//   nbdefense-model v1
//   tokenizer <stemmer> <stoplist>
//   alpha <alpha_h> <alpha_s>
//   order <1|2>
//   <nbparams block: ham>
//   <mixture block: spam>
//
// An order-1 spam model is stored as a mixture with beta = (1, 0) and two equal components.
struct FilterModel {
    std::string stemmer = "porter";
    std::string stoplist = "default";
    Vocabulary vocab;
    int order = 1;
    DefendedClassifier classifier;
};

void write_model(std::ostream& out, const FilterModel& model);
FilterModel read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const FilterModel& model);
FilterModel load_model(const std::filesystem::path& path);

}  // namespace nbdefense
