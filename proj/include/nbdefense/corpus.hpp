#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace nbdefense {

using WordIndex = std::uint32_t;
using Tokens = std::vector<std::string>;
using Stoplist = std::unordered_set<std::string>;
using Stemmer = std::function<std::string(std::string_view)>;

// Sorted, duplicate-free word list with O(1) reverse lookup.
class Vocabulary {
public:
    Vocabulary() = default;

    // Throws DataError if `words` is not strictly increasing.
    explicit Vocabulary(std::vector<std::string> words);

    std::size_t size() const noexcept { return words_.size(); }
    bool empty() const noexcept { return words_.empty(); }
    const std::vector<std::string>& words() const noexcept { return words_; }
    const std::string& word(WordIndex i) const { return words_.at(i); }
    std::optional<WordIndex> index_of(std::string_view token) const;

    // Newline-separated tokens in index order.
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, WordIndex> index_;
};

// Sparse word-count vector of one email. Entries are sorted by index, counts >= 1.
struct DocVector {
    struct Entry {
        WordIndex index;
        std::uint32_t count;
        bool operator==(const Entry&) const = default;
    };

    std::vector<Entry> entries;
    std::uint64_t total = 0;

    bool empty() const noexcept { return total == 0; }

    // Builds from an ordered index→count map, skipping zero counts.
    static DocVector from_counts(const std::map<WordIndex, std::uint32_t>& counts);
    // Builds from a dense count array.
    static DocVector from_dense(std::span<const std::uint32_t> counts);

    // Checks the sparse invariants against vocabulary size `n`.
    bool valid_for(std::size_t n) const;

    bool operator==(const DocVector&) const = default;
};

using Docs = std::vector<DocVector>;

struct LabeledCorpus {
    Docs ham;
    Docs spam;
};

std::string identity_stem(std::string_view token);

// Lowercased runs of Unicode letters, stoplist removed, stemmed, length >= 2.
Tokens tokenize(std::string_view raw_text, const Stoplist& stoplist, const Stemmer& stemmer);

// Tokens with corpus frequency >= min_count, sorted. Throws EmptyVocabularyError.
Vocabulary build_vocabulary(std::span<const Tokens> docs, std::size_t min_count = 1);

DocVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab);

Stoplist load_stoplist(const std::filesystem::path& path);

// Text preprocessing settings shared by training and classification.
struct TextPipeline {
    Stoplist stoplist;
    Stemmer stemmer = identity_stem;
    std::string stemmer_name = "none";
    std::string stoplist_name = "none";

    Tokens operator()(std::string_view text) const { return tokenize(text, stoplist, stemmer); }

    // stemmer: "porter" | "none"; stoplist: "none" | "default" | path.
    static TextPipeline make(const std::string& stemmer, const std::string& stoplist);
};

// Directory shipped with the repository (stoplist lives here).
std::filesystem::path default_data_dir();

enum class Label { Ham, Spam };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

// One line of a TREC-style index: `<label> <relative-path>`.
struct IndexEntry {
    Label label;
    std::filesystem::path path;  // resolved against the index directory
};

std::vector<IndexEntry> read_index(const std::filesystem::path& index_file);

std::string read_text_file(const std::filesystem::path& path);

// Tokenized emails of one index, in index order.
struct TokenizedCorpus {
    std::vector<Tokens> ham;
    std::vector<Tokens> spam;
};

TokenizedCorpus load_tokenized(const std::filesystem::path& index_file, const TextPipeline& pipeline);

LabeledCorpus vectorize_corpus(const TokenizedCorpus& corpus, const Vocabulary& vocab);

// Writes docs as plain text (each word repeated `count` times) plus an index file.
void write_corpus_dir(const std::filesystem::path& dir, const Vocabulary& vocab,
                      std::span<const DocVector> ham, std::span<const DocVector> spam,
                      const std::string& index_name = "index");

}  // namespace nbdefense
