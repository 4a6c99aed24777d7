#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace rmt {

// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// Minimal CSV row builder. Fields containing separators or quotes are quoted.
class CsvRow {
public:
    CsvRow& add(std::string_view field) {
        sep();
        if (field.find_first_of(",\"\n") == std::string_view::npos) {
            line_ += field;
        } else {
            line_ += '"';
            for (char c : field) {
                if (c == '"') line_ += '"';
                line_ += c;
            }
            line_ += '"';
        }
        return *this;
    }
    CsvRow& add(const std::string& field) { return add(std::string_view(field)); }
    CsvRow& add(const char* field) { return add(std::string_view(field)); }
    CsvRow& add(double x) { return add(std::string_view(format_double(x))); }
    CsvRow& add(std::uint64_t x) { return add(std::string_view(std::to_string(x))); }
    CsvRow& add(std::int64_t x) { return add(std::string_view(std::to_string(x))); }
    CsvRow& add(int x) { return add(std::string_view(std::to_string(x))); }
    CsvRow& add(unsigned x) { return add(std::string_view(std::to_string(x))); }
    CsvRow& add(unsigned long long x) { return add(static_cast<std::uint64_t>(x)); }
    CsvRow& add(long long x) { return add(static_cast<std::int64_t>(x)); }

    void write(std::ostream& out) const { out << line_ << '\n'; }
    const std::string& str() const { return line_; }

private:
    void sep() {
        if (!first_) line_ += ',';
        first_ = false;
    }
    std::string line_;
    bool first_ = true;
};

}  // namespace rmt
