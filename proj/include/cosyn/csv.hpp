#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace cosyn::csv {

/// Shortest text that reads back to the same double.
std::string format(double v);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Throws ConfigError on malformed numbers.
double to_double(std::string_view s);
long long to_int(std::string_view s);

struct Table {
  std::vector<std::string> comments;  // `#` lines, marker stripped
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ConfigError when absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a header-first CSV, collecting leading `#` lines as comments.
Table read(const std::string& path);

/// LF-terminated comma-separated output.
class Writer {
 public:
  explicit Writer(const std::string& path);

  void comment(std::string_view text);
  void header(const std::vector<std::string>& names) { fields(names); }

  template <typename... Ts>
  void row(const Ts&... values) {
    std::vector<std::string> cells{cell(values)...};
    fields(cells);
  }
  void fields(const std::vector<std::string>& cells);

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format(v); }
  template <typename T>
  static std::string cell(const T& v) {
    return std::to_string(v);
  }

  std::ofstream out_;
};

}  // namespace cosyn::csv
