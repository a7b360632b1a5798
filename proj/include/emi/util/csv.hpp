#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace emi::csv {

/// Delimiter implied by a file extension: '\t' for .tsv/.tab, ',' otherwise.
[[nodiscard]] char delimiter_for(const std::filesystem::path& path);

/// RFC 4180 style reader: quoted fields may contain delimiters, doubled
/// quotes and newlines.
class Reader {
 public:
  Reader(std::istream& in, char delim);

  /// Reads the next record. `line` receives the 1-based physical line on
  /// which the record started. Returns false at end of input.
  bool next(std::vector<std::string>& fields, std::size_t& line);

 private:
  std::istream& in_;
  char delim_;
  std::size_t line_ = 0;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  /// Column index by name; throws naming the column when absent.
  [[nodiscard]] std::size_t column(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> find_column(std::string_view name) const;
};

/// Loads a whole delimited file with a header row. Rows with a field count
/// different from the header are a fatal error naming the line.
[[nodiscard]] Table read_table(const std::filesystem::path& path);
[[nodiscard]] Table read_table(std::istream& in, char delim);

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delim = ',');

/// Shortest representation that round-trips the double exactly.
[[nodiscard]] std::string format_number(double value);

/// Empty, "NA", "NaN" and "null" (any case) read as missing.
[[nodiscard]] std::optional<double> parse_optional_number(std::string_view text);
[[nodiscard]] double parse_number(std::string_view text);

}  // namespace emi::csv
