#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aggwind::text {

/// Zero or negative digits selects the shortest round-trippable form.
std::string format_double(double value, int significant_digits = 0);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view delim);

/// Whole-string parse; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace aggwind::text
