#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Deterministic text output helpers. All numbers go through one
// fixed-precision formatter so repeated runs produce byte-identical files.

namespace microtrap::io {

// Shortest round-trip-ish representation at 12 significant digits;
// non-finite values print as "nan"/"inf"/"-inf". Locale-independent.
std::string format_double(double v);

std::string join_csv(const std::vector<std::string>& cells);

// Writes header + rows, one line each, '\n' endings.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text(const std::filesystem::path& path, const std::string& body);

std::string read_text(const std::filesystem::path& path);

}  // namespace microtrap::io
