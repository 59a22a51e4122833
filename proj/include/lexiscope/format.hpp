#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexiscope {

/// Shortest decimal text that parses back to exactly the same value.
template <class Scalar>
std::string format_number(Scalar value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

/// Parses the whole of `text` as a number; nullopt on any trailing garbage.
template <class Scalar>
std::optional<Scalar> parse_number(std::string_view text) {
    Scalar value{};
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split_whitespace(std::string_view line);

std::string trim(std::string_view text);

std::string to_lower_ascii(std::string_view text);

std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view contents);

}  // namespace lexiscope
