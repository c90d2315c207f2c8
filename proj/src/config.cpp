#include "bayesfault/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "bayesfault/errors.hpp"

namespace bayesfault {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ParseError("config key '" + key + "' has invalid value '" + text + "'");
    return value;
}

}  // namespace

Config Config::parse(std::istream& in) {
    Config config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError("config line is not key=value", line_no);
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw ParseError("config line has an empty key", line_no);
        config.values_[key] = trim(body.substr(eq + 1));
    }
    return config;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config '" + path.string() + "'");
    try {
        return parse(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string(), e);
    }
}

const std::string* Config::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto* v = find(key);
    return v ? parse_value<double>(key, *v) : fallback;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    const auto* v = find(key);
    return v ? parse_value<std::size_t>(key, *v) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto* v = find(key);
    return v ? parse_value<std::uint64_t>(key, *v) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_value<double>(key, item));
    return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<std::size_t> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_value<std::size_t>(key, item));
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto* v = find(key);
    return v ? split_list(*v) : fallback;
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        if (!used_.count(key)) out.push_back(key);
    }
    return out;
}

std::vector<std::string> Config::echo() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) out.push_back(key + "=" + value);
    return out;
}

}  // namespace bayesfault
