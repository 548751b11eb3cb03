#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exo::io {

/// Numbers in every CSV we write carry 9 significant digits.
std::string format_number(double value);

/// Formats an optional value, writing "NA" for an undefined one.
std::string format_optional(const std::optional<double>& value);

double parse_double(std::string_view text, std::string_view context);
std::optional<double> parse_optional(std::string_view text, std::string_view context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws SchemaError naming the column if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string to_csv_string(const CsvTable& table);

/// Plain `key=value` files with `#` comments. Keys are kept sorted so that
/// writing a parsed file back is deterministic.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues read_key_values(const std::filesystem::path& path);
KeyValues parse_key_values(std::string_view text, std::string_view origin);
void write_key_values(const std::filesystem::path& path, const KeyValues& values);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace exo::io
