#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rulemine::text {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Splits on sep; fields are trimmed.
inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + sep.size();
    }
    return out;
}

// Lines with their 1-based numbers; a trailing '\r' is dropped.
struct Line {
    std::size_t number;
    std::string_view content;
};

inline std::vector<Line> lines(std::string_view s) {
    std::vector<Line> out;
    std::size_t start = 0, number = 1;
    while (start < s.size()) {
        auto pos = s.find('\n', start);
        auto line = s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back({number++, line});
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
    s = trim(s);
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    double v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

// Non-negative decimal "123.45" as an exact fraction digits / 10^scale.
struct Decimal {
    std::uint64_t digits = 0;
    unsigned scale = 0;

    // Value rescaled to `target` fractional digits; nullopt if that loses precision.
    std::optional<std::uint64_t> at_scale(unsigned target) const {
        std::uint64_t v = digits;
        unsigned s = scale;
        while (s > target) {
            if (v % 10) return std::nullopt;
            v /= 10;
            --s;
        }
        while (s < target) {
            v *= 10;
            ++s;
        }
        return v;
    }

    std::uint64_t denominator() const {
        std::uint64_t d = 1;
        for (unsigned k = 0; k < scale; ++k) d *= 10;
        return d;
    }
};

inline std::optional<Decimal> parse_decimal(std::string_view s) {
    s = trim(s);
    if (s.empty() || s.size() > 18) return std::nullopt;
    Decimal d;
    bool seen_point = false, seen_digit = false;
    for (char c : s) {
        if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            d.digits = d.digits * 10 + static_cast<std::uint64_t>(c - '0');
            if (seen_point) ++d.scale;
            seen_digit = true;
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) return std::nullopt;
    return d;
}

// Percentage with at most two fractional digits, in hundredths of a percent.
inline std::optional<std::uint64_t> parse_hundredths(std::string_view s) {
    auto d = parse_decimal(s);
    if (!d) return std::nullopt;
    return d->at_scale(2);
}

}  // namespace rulemine::text
