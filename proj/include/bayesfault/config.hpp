#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace bayesfault {

/// Flat `key = value` text configuration. Blank lines and lines starting with
/// '#' are ignored. Lists are comma-separated.
class Config {
public:
    static Config parse(std::istream& in);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

    /// Keys that were never read; used to reject typos.
    std::vector<std::string> unused_keys() const;
    /// Sorted `key=value` lines, for echoing into result metadata.
    std::vector<std::string> echo() const;

private:
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace bayesfault
