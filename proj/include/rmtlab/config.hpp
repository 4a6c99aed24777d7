#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmt {

inline constexpr std::string_view kVersion = "0.1.0";

// Flat "key = value" configuration. Lines starting with '#' (after
// whitespace) are comments, as is anything after " #" on a value line.
// Duplicate keys and malformed lines are ValidationErrors.
class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<config>");
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void erase(const std::string& key) { values_.erase(key); }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const { return values_; }

    // Typed accessors. The plain forms throw ValidationError naming the key
    // when it is missing or malformed.
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::uint64_t integer(const std::string& key) const;
    std::uint64_t integer_or(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<double> list_or(const std::string& key, std::vector<double> fallback) const;
    std::vector<std::string> words_or(const std::string& key, std::vector<std::string> fallback) const;

    // Sorted "key = value" lines; the hash below is FNV-1a of this text.
    std::string canonical() const;
    std::uint64_t hash() const;

private:
    std::map<std::string, std::string> values_;
};

double parse_number(std::string_view text, const std::string& what);
std::uint64_t parse_integer(std::string_view text, const std::string& what);

}  // namespace rmt
