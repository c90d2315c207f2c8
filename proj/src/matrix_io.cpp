#include "bayesfault/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bayesfault/errors.hpp"

namespace bayesfault {
namespace {

constexpr std::string_view kTag = "# transition_matrix";

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::size_t require_size(const std::map<std::string, std::size_t>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("matrix preamble is missing '" + key + "'", 1);
    return it->second;
}

}  // namespace

void write_matrix(const TransitionMatrix& a, std::ostream& out) {
    out << kTag << " rows=" << a.rows() << " cols=" << a.cols();
    std::vector<std::string> header;
    if (a.config()) {
        out << " n=" << a.config()->n << " k=" << a.config()->k << " d=" << a.config()->d;
        header = a.config()->feature_names();
    } else {
        for (std::size_t j = 0; j < a.cols(); ++j) header.push_back("c" + std::to_string(j));
    }
    out << '\n';
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out << (j ? "," : "") << format_double(a(i, j));
        out << '\n';
    }
}

void write_matrix(const TransitionMatrix& a, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
    write_matrix(a, out);
}

TransitionMatrix read_matrix(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kTag, 0) != 0) {
        throw ParseError("matrix file must start with '" + std::string(kTag) + "'", 1);
    }
    std::map<std::string, std::size_t> kv;
    std::istringstream pre(line.substr(kTag.size()));
    std::string token;
    while (pre >> token) {
        const auto eq = token.find('=');
        std::size_t value = 0;
        const char* begin = token.data() + eq + 1;
        const char* end = token.data() + token.size();
        if (eq == std::string::npos || std::from_chars(begin, end, value).ptr != end) {
            throw ParseError("malformed preamble entry '" + token + "'", 1);
        }
        kv[token.substr(0, eq)] = value;
    }
    const std::size_t rows = require_size(kv, "rows");
    const std::size_t cols = require_size(kv, "cols");
    std::optional<KernelConfig> config;
    if (kv.count("n") || kv.count("k") || kv.count("d")) {
        config = KernelConfig::make(require_size(kv, "n"), require_size(kv, "k"), require_size(kv, "d"));
    }

    if (!std::getline(in, line)) throw ParseError("matrix file is missing its header row", 2);
    RowMatrix entries(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw ParseError("matrix file ends early", i + 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t comma = line.find(',', start);
            const bool last = j + 1 == cols;
            if (last != (comma == std::string::npos)) throw ParseError("wrong number of matrix columns", i + 3);
            const std::size_t stop = last ? line.size() : comma;
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + stop, v);
            if (ec != std::errc() || ptr != line.data() + stop) {
                throw ParseError("matrix entry is not a number", i + 3, j + 1);
            }
            entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            start = stop + 1;
        }
    }
    return TransitionMatrix(std::move(entries), config);
}

TransitionMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    try {
        return read_matrix(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string(), e);
    }
}

}  // namespace bayesfault
