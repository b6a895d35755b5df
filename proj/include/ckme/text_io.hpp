#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ckme::text {

/// Shortest form is not guaranteed; 17 significant digits always round-trips.
std::string format_double(double v);

/// Split on a single-character delimiter; empty fields are kept.
std::vector<std::string_view> split(std::string_view line, char delim);

std::string_view trim(std::string_view s) noexcept;

/// Strict full-field parse; returns false on any trailing garbage or empty input.
bool parse_double(std::string_view s, double& out) noexcept;

std::string read_file(const std::filesystem::path& path);

/// Write comma-joined values followed by a newline.
void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace ckme::text
