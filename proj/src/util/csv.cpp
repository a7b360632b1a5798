#include "emi/util/csv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace emi::csv {

char delimiter_for(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".tsv" || ext == ".tab") ? '\t' : ',';
}

Reader::Reader(std::istream& in, char delim) : in_(in), delim_(delim) {}

bool Reader::next(std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string physical;
  if (!std::getline(in_, physical)) return false;
  ++line_;
  line = line_;

  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  while (true) {
    for (std::size_t i = 0; i < physical.size(); ++i) {
      const char c = physical[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < physical.size() && physical[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty() && !was_quoted) {
        in_quotes = true;
        was_quoted = true;
      } else if (c == delim_) {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\r' && i + 1 == physical.size()) {
        // tolerate CRLF
      } else {
        field.push_back(c);
      }
    }
    if (!in_quotes) break;
    field.push_back('\n');
    if (!std::getline(in_, physical)) {
      throw std::runtime_error("unterminated quoted field starting on line " + std::to_string(line));
    }
    ++line_;
  }
  fields.push_back(std::move(field));
  return true;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw std::runtime_error("missing column '" + std::string(name) + "'");
}

Table read_table(std::istream& in, char delim) {
  Reader reader(in, delim);
  Table table;
  std::size_t line = 0;
  if (!reader.next(table.header, line)) throw std::runtime_error("empty table: no header row");
  std::vector<std::string> fields;
  while (reader.next(fields, line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != table.header.size()) {
      throw std::runtime_error("line " + std::to_string(line) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
    table.lines.push_back(line);
  }
  return table;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_table(in, delimiter_for(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delim) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << delim;
    const auto& f = fields[i];
    if (f.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos) {
      out << '"';
      for (const char c : f) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    } else {
      out << f;
    }
  }
  out << '\n';
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), res.ptr};
}

std::optional<double> parse_optional_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.empty() || lower == "na" || lower == "nan" || lower == "null") return std::nullopt;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

double parse_number(std::string_view text) {
  auto v = parse_optional_number(text);
  if (!v) throw std::invalid_argument("missing numeric value");
  return *v;
}

}  // namespace emi::csv
