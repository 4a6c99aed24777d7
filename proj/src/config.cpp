#include "rmtlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rmtlab/errors.hpp"
#include "rmtlab/seed.hpp"

namespace rmt {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

double parse_number(std::string_view text, const std::string& what) {
    text = trim(text);
    if (text == "inf" || text == "+inf") return INFINITY;
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw ValidationError(what + ": '" + std::string(text) + "' is not a number");
    return v;
}

std::uint64_t parse_integer(std::string_view text, const std::string& what) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty()) return v;
    // Accept integral values written as 1e5.
    const double d = parse_number(text, what);
    if (d < 0.0 || d != std::floor(d) || d >= 1.8e19)
        throw ValidationError(what + ": '" + std::string(text) + "' is not a nonnegative integer");
    return static_cast<std::uint64_t>(d);
}

Config Config::parse(std::string_view text, const std::string& source) {
    Config cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto hash = line.find(" #");
        if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) throw ValidationError(where + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ValidationError(where + ": empty key");
        if (cfg.values_.count(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
    if (trim(key).empty()) throw ValidationError("config override with an empty key");
    values_[std::string(trim(key))] = std::string(trim(value));
}

std::string Config::text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("missing required key '" + key + "'");
    return it->second;
}

std::string Config::text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
}

double Config::number(const std::string& key) const {
    return parse_number(text(key), "key '" + key + "'");
}

double Config::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::uint64_t Config::integer(const std::string& key) const {
    return parse_integer(text(key), "key '" + key + "'");
}

std::uint64_t Config::integer_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::vector<double> Config::list(const std::string& key) const {
    std::vector<double> out;
    const std::string raw = text(key);
    for (auto item : split_commas(raw)) out.push_back(parse_number(item, "key '" + key + "'"));
    return out;
}

std::vector<double> Config::list_or(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? list(key) : fallback;
}

std::vector<std::string> Config::words_or(const std::string& key, std::vector<std::string> fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::string> out;
    const std::string raw = text(key);
    for (auto item : split_commas(raw)) {
        if (item.empty()) throw ValidationError("key '" + key + "': empty list item");
        out.emplace_back(item);
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t Config::hash() const {
    return fnv1a64(canonical());
}

}  // namespace rmt
