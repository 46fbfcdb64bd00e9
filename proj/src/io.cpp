#include "cpo/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cpo/error.hpp"

namespace cpo::io {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

void CsvWriter::meta(std::string_view key, std::string_view value) {
  text_ += "# ";
  text_ += key;
  text_ += '=';
  text_ += value;
  text_ += '\n';
}

void CsvWriter::meta(std::string_view key, double value) { meta(key, format_double(value)); }

void CsvWriter::columns(std::initializer_list<std::string_view> names) { row_text(names); }

void CsvWriter::row(std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) text_ += ',';
    text_ += format_double(v);
    first = false;
  }
  text_ += '\n';
}

void CsvWriter::row_text(std::initializer_list<std::string_view> values) {
  bool first = true;
  for (auto v : values) {
    if (!first) text_ += ',';
    text_ += v;
    first = false;
  }
  text_ += '\n';
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError("mkdir_failed",
                    "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("open_failed", "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("write_failed", "failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("open_failed", "cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read_failed", "failed reading " + path.string());
  return ss.str();
}

namespace {

// Fields separated by commas, semicolons or whitespace; runs of separators
// count once.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  auto is_sep = [](char c) {
    return c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c));
  };
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool looks_like_name(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
          c == '(' || c == ')'))
      return false;
  return true;
}

}  // namespace

Columns parse_columns(std::string_view text, const std::string& source) {
  Columns cols;
  std::size_t line_no = 0;
  bool seen_data = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split_fields(line.substr(first));
    double x = 0.0, y = 0.0;
    const bool numeric = fields.size() >= 2 && parse_double(fields[0], x) && parse_double(fields[1], y);
    if (!numeric) {
      const bool header = !seen_data && fields.size() >= 2 && looks_like_name(fields[0]) &&
                          looks_like_name(fields[1]);
      if (!header) {
        std::ostringstream os;
        os << source << ":" << line_no << ": expected two numeric columns, got '" << line << "'";
        throw ValidationError("parse_error", os.str());
      }
    } else {
      cols.x.push_back(x);
      cols.y.push_back(y);
    }
    seen_data = true;
    if (end == text.size()) break;
  }
  return cols;
}

Columns read_columns(const std::filesystem::path& path) {
  return parse_columns(read_file(path), path.string());
}

}  // namespace cpo::io
