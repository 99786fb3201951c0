#pragma once

// Line-oriented `key = value` text format shared by instance files and
// experiment configs, plus the CSV/atomic-write helpers the tools use.
// Doubles are printed with 17 significant digits so files round-trip exactly.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace markvi {

std::string format_double(double v);            // %.17g
std::string format_doubles(const std::vector<double>& v);  // comma-separated

double parse_double(const std::string& s);
std::int64_t parse_int(const std::string& s);
std::uint64_t parse_uint(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

/// Parsed `key = value` file. Keys are unique; later lines override earlier
/// ones. Blank lines and lines starting with '#' are ignored.
struct KeyValueFile {
  std::map<std::string, std::string> entries;
  bool has(const std::string& key) const { return entries.count(key) != 0; }
  const std::string& get(const std::string& key) const;  // throws IoError if absent
};

KeyValueFile read_key_value_file(const std::filesystem::path& path);
KeyValueFile parse_key_value_text(const std::string& text);

/// Writes `text` to `path` via a temp file + rename so readers never see a
/// partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace markvi
