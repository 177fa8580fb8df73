#include "nbdefense/corpus.hpp"

#include <algorithm>
#include <cwctype>
#include <fstream>
#include <locale.h>
#include <sstream>
#include <wctype.h>

#include "nbdefense/error.hpp"
#include "nbdefense/porter_stemmer.hpp"

#ifndef NBDEFENSE_DATA_DIR
#define NBDEFENSE_DATA_DIR "data"
#endif

namespace nbdefense {

namespace fs = std::filesystem;

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (i > 0 && !(words_[i - 1] < words_[i]))
            throw DataError("vocabulary words must be unique and sorted: '" + words_[i] + "'");
        index_.emplace(words_[i], static_cast<WordIndex>(i));
    }
}

std::optional<WordIndex> Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Vocabulary::save(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary: " + path.string());
    for (const auto& w : words_) out << w << '\n';
}

Vocabulary Vocabulary::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read vocabulary: " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) words.push_back(line);
    }
    return Vocabulary(std::move(words));
}

DocVector DocVector::from_counts(const std::map<WordIndex, std::uint32_t>& counts) {
    DocVector doc;
    doc.entries.reserve(counts.size());
    for (const auto& [index, count] : counts) {
        if (count == 0) continue;
        doc.entries.push_back({index, count});
        doc.total += count;
    }
    return doc;
}

DocVector DocVector::from_dense(std::span<const std::uint32_t> counts) {
    DocVector doc;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        doc.entries.push_back({static_cast<WordIndex>(i), counts[i]});
        doc.total += counts[i];
    }
    return doc;
}

bool DocVector::valid_for(std::size_t n) const {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].count == 0 || entries[i].index >= n) return false;
        if (i > 0 && entries[i - 1].index >= entries[i].index) return false;
        sum += entries[i].count;
    }
    return sum == total;
}

std::string identity_stem(std::string_view token) { return std::string(token); }

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one UTF-8 sequence at `pos`, advancing it. Invalid bytes decode to U+FFFD.
char32_t decode_utf8(std::string_view s, std::size_t& pos) {
    const auto lead = static_cast<unsigned char>(s[pos++]);
    if (lead < 0x80) return lead;
    int extra = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    } else {
        return kReplacement;
    }
    for (int i = 0; i < extra; ++i) {
        if (pos >= s.size() || (static_cast<unsigned char>(s[pos]) & 0xC0) != 0x80) return kReplacement;
        cp = (cp << 6) | (static_cast<unsigned char>(s[pos++]) & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacement;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Unicode letter classification through glibc's C.UTF-8 tables; ASCII-only without them.
class LetterClassifier {
public:
    LetterClassifier() {
        locale_ = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
        if (locale_ == static_cast<locale_t>(nullptr))
            locale_ = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(nullptr));
    }
    ~LetterClassifier() {
        if (locale_ != static_cast<locale_t>(nullptr)) freelocale(locale_);
    }
    LetterClassifier(const LetterClassifier&) = delete;
    LetterClassifier& operator=(const LetterClassifier&) = delete;

    bool is_letter(char32_t cp) const {
        if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
        if (cp == kReplacement || locale_ == static_cast<locale_t>(nullptr)) return false;
        return iswalpha_l(static_cast<wint_t>(cp), locale_) != 0;
    }

    char32_t lower(char32_t cp) const {
        if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
        if (locale_ == static_cast<locale_t>(nullptr)) return cp;
        return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), locale_));
    }

private:
    locale_t locale_;
};

std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

const LetterClassifier& letters() {
    static const LetterClassifier classifier;
    return classifier;
}

}  // namespace

Tokens tokenize(std::string_view raw_text, const Stoplist& stoplist, const Stemmer& stemmer) {
    Tokens tokens;
    const auto& cls = letters();
    std::string current;
    std::size_t letters_in_current = 0;

    auto flush = [&] {
        if (letters_in_current > 0 && !stoplist.contains(current)) {
            std::string stemmed = stemmer ? stemmer(current) : current;
            if (code_points(stemmed) >= 2 && !stoplist.contains(stemmed)) tokens.push_back(std::move(stemmed));
        }
        current.clear();
        letters_in_current = 0;
    };

    std::size_t pos = 0;
    while (pos < raw_text.size()) {
        const char32_t cp = decode_utf8(raw_text, pos);
        if (cls.is_letter(cp)) {
            append_utf8(current, cls.lower(cp));
            ++letters_in_current;
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

Vocabulary build_vocabulary(std::span<const Tokens> docs, std::size_t min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::map<std::string, std::size_t> freq;
    for (const auto& doc : docs)
        for (const auto& tok : doc) ++freq[tok];
    std::vector<std::string> words;
    for (const auto& [tok, n] : freq)
        if (n >= min_count) words.push_back(tok);
    if (words.empty()) throw EmptyVocabularyError();
    return Vocabulary(std::move(words));
}

DocVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab) {
    std::map<WordIndex, std::uint32_t> counts;
    for (const auto& tok : tokens) {
        if (auto idx = vocab.index_of(tok)) ++counts[*idx];
    }
    return DocVector::from_counts(counts);
}

Stoplist load_stoplist(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read stoplist: " + path.string());
    Stoplist words;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string w;
        while (fields >> w) words.insert(w);
    }
    return words;
}

fs::path default_data_dir() { return fs::path(NBDEFENSE_DATA_DIR); }

TextPipeline TextPipeline::make(const std::string& stemmer, const std::string& stoplist) {
    TextPipeline p;
    if (stemmer == "porter") {
        p.stemmer = porter_stem;
    } else if (stemmer == "none") {
        p.stemmer = identity_stem;
    } else {
        throw ConfigError("unknown stemmer '" + stemmer + "' (expected porter|none)");
    }
    p.stemmer_name = stemmer;
    if (stoplist == "default") {
        p.stoplist = load_stoplist(default_data_dir() / "stoplist.txt");
    } else if (stoplist != "none" && !stoplist.empty()) {
        p.stoplist = load_stoplist(stoplist);
    }
    p.stoplist_name = stoplist.empty() ? "none" : stoplist;
    return p;
}

std::string_view to_string(Label label) { return label == Label::Ham ? "ham" : "spam"; }

Label parse_label(std::string_view text) {
    if (text == "ham") return Label::Ham;
    if (text == "spam") return Label::Spam;
    throw DataError("unknown label '" + std::string(text) + "' (expected ham|spam)");
}

std::vector<IndexEntry> read_index(const fs::path& index_file) {
    std::ifstream in(index_file);
    if (!in) throw DataError("cannot read index file: " + index_file.string());
    const fs::path base = index_file.parent_path();
    std::vector<IndexEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream fields(line);
        std::string label, rel;
        if (!(fields >> label >> rel))
            throw DataError(index_file.string() + ":" + std::to_string(lineno) + ": expected '<label> <path>'");
        entries.push_back({parse_label(label), base / rel});
    }
    return entries;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read email: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TokenizedCorpus load_tokenized(const fs::path& index_file, const TextPipeline& pipeline) {
    TokenizedCorpus corpus;
    for (const auto& entry : read_index(index_file)) {
        auto tokens = pipeline(read_text_file(entry.path));
        (entry.label == Label::Ham ? corpus.ham : corpus.spam).push_back(std::move(tokens));
    }
    return corpus;
}

LabeledCorpus vectorize_corpus(const TokenizedCorpus& corpus, const Vocabulary& vocab) {
    LabeledCorpus out;
    out.ham.reserve(corpus.ham.size());
    out.spam.reserve(corpus.spam.size());
    for (const auto& t : corpus.ham) out.ham.push_back(vectorize(t, vocab));
    for (const auto& t : corpus.spam) out.spam.push_back(vectorize(t, vocab));
    return out;
}

void write_corpus_dir(const fs::path& dir, const Vocabulary& vocab, std::span<const DocVector> ham,
                      std::span<const DocVector> spam, const std::string& index_name) {
    fs::create_directories(dir / "data");
    std::ofstream index(dir / index_name, std::ios::binary);
    if (!index) throw DataError("cannot write index in " + dir.string());
    std::size_t n = 0;
    auto emit = [&](const DocVector& doc, Label label) {
        const std::string rel = "data/" + index_name + "." + std::to_string(++n) + ".txt";
        std::ofstream out(dir / rel, std::ios::binary);
        if (!out) throw DataError("cannot write email " + (dir / rel).string());
        bool first = true;
        for (const auto& e : doc.entries) {
            for (std::uint32_t c = 0; c < e.count; ++c) {
                out << (first ? "" : " ") << vocab.word(e.index);
                first = false;
            }
        }
        out << '\n';
        index << to_string(label) << ' ' << rel << '\n';
    };
    for (const auto& d : ham) emit(d, Label::Ham);
    for (const auto& d : spam) emit(d, Label::Spam);
}

}  // namespace nbdefense
