#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace maernav::textio {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Fixed 9-significant-digit rendering used by trajectory and result logs.
std::string format_g9(double v);

/// Strict full-token parse; returns false on any trailing junk.
bool parse_double(std::string_view token, double& out);
bool parse_int(std::string_view token, long long& out);

/// Splits on ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view line);

/// Drops a trailing '#' comment and surrounding whitespace.
std::string_view strip_comment(std::string_view line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace maernav::textio
