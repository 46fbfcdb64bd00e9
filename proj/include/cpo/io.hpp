#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cpo::io {

/// Shortest decimal text that reads back to the same double. Locale
/// independent, so output files are byte-stable.
std::string format_double(double v);

/// Parses a full string as a double; returns false on trailing junk.
bool parse_double(std::string_view s, double& out);

/// 64-bit FNV-1a, printed as 16 hex digits by hash_hex.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::uint64_t h);

/// '#'-prefixed key=value header followed by a column header line.
class CsvWriter {
 public:
  void meta(std::string_view key, std::string_view value);
  void meta(std::string_view key, double value);
  void columns(std::initializer_list<std::string_view> names);
  void row(std::initializer_list<double> values);
  void row_text(std::initializer_list<std::string_view> values);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);
/// Reads a whole file. Throws IoError.
std::string read_file(const std::filesystem::path& path);

struct Columns {
  std::vector<double> x;
  std::vector<double> y;
};

/// Reads two numeric columns separated by commas or whitespace. Blank lines
/// and '#' comments are skipped; the first data line may be a header of
/// column names. Any other non-numeric row is a ValidationError naming the
/// file and line.
Columns parse_columns(std::string_view text, const std::string& source);
Columns read_columns(const std::filesystem::path& path);

}  // namespace cpo::io
