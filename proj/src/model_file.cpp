#include "nbdefense/model_file.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nbdefense/error.hpp"

namespace nbdefense {

void write_model(std::ostream& out, const FilterModel& model) {
    out << "nbdefense-model v1\n";
    out << "tokenizer " << model.stemmer << ' ' << model.stoplist << '\n';
    out << "alpha " << format_double(model.classifier.alpha.ham) << ' ' << format_double(model.classifier.alpha.spam)
        << '\n';
    out << "order " << model.order << '\n';
    write_params(out, model.classifier.ham, model.vocab);
    write_mixture(out, model.classifier.spam, model.vocab);
}

namespace {

std::istringstream expect_line(std::istream& in, const std::string& tag) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("model file truncated: missing '" + tag + "' line");
    std::istringstream fields(line);
    std::string got;
    fields >> got;
    if (got != tag) throw DataError("model file: expected '" + tag + "', got '" + line + "'");
    return fields;
}

}  // namespace

FilterModel read_model(std::istream& in) {
    FilterModel m;
    {
        auto f = expect_line(in, "nbdefense-model");
        std::string version;
        f >> version;
        if (version != "v1") throw DataError("unsupported model version '" + version + "'");
    }
    {
        auto f = expect_line(in, "tokenizer");
        if (!(f >> m.stemmer >> m.stoplist)) throw DataError("model file: bad tokenizer line");
    }
    {
        auto f = expect_line(in, "alpha");
        if (!(f >> m.classifier.alpha.ham >> m.classifier.alpha.spam)) throw DataError("model file: bad alpha line");
    }
    {
        auto f = expect_line(in, "order");
        if (!(f >> m.order) || (m.order != 1 && m.order != 2)) throw DataError("model file: bad order line");
    }
    m.classifier.ham = read_params(in, nullptr, &m.vocab);
    m.classifier.spam = read_mixture(in, &m.vocab);
    return m;
}

void save_model(const std::filesystem::path& path, const FilterModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + path.string());
    write_model(out, model);
}

FilterModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read model: " + path.string());
    return read_model(in);
}

}  // namespace nbdefense
