#include "emi/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "emi/util/hash.hpp"
#include "emi/util/jsonl.hpp"
#include "emi/util/parallel.hpp"

namespace emi::panel {

using nlohmann::json;

std::vector<YearlyStat> yearly_mean(const std::vector<fusion::SegmentScore>& scores) {
  std::map<std::pair<std::string, int>, std::pair<double, std::size_t>> acc;
  for (const auto& s : scores) {
    auto& [sum, n] = acc[{s.country, s.year}];
    sum += s.emi;
    ++n;
  }
  std::vector<YearlyStat> out;
  out.reserve(acc.size());
  for (const auto& [key, v] : acc) {
    const double mean = v.first / static_cast<double>(v.second);
    out.push_back({key.first, key.second, mean, v.second, mean, mean});
  }
  return out;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values,
                                            const BootstrapOptions& options, std::string_view key) {
  if (values.empty()) throw std::invalid_argument("bootstrap_mean_ci: empty input");
  if (options.iters == 0) throw std::invalid_argument("bootstrap_mean_ci: iters must be positive");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::invalid_argument("bootstrap_mean_ci: level must be in (0, 1)");
  }
  const std::size_t n = values.size();
  std::vector<double> means(options.iters);
  parallel_for(options.iters, options.jobs, [&](std::size_t it) {
    std::mt19937_64 rng(hash::derive_seed(options.seed, key, it));
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += values[draw_index(rng(), n)];
    means[it] = sum / static_cast<double>(n);
  });
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - options.level) / 2.0;
  return {quantile_sorted(means, alpha), quantile_sorted(means, 1.0 - alpha)};
}

std::vector<YearlyStat> aggregate_years(const std::vector<fusion::SegmentScore>& scores,
                                        const BootstrapOptions& options) {
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& s : scores) groups[{s.country, s.year}].push_back(s.emi);
  auto out = yearly_mean(scores);
  for (auto& row : out) {
    const auto key = row.country + ":" + std::to_string(row.year);
    const auto [lo, hi] = bootstrap_mean_ci(groups.at({row.country, row.year}), options, key);
    row.ci_low = lo;
    row.ci_high = hi;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<double> PanelRow::get(const std::string& name) const {
  if (name == "year") return static_cast<double>(year);
  if (name == "n_segments") return static_cast<double>(n_segments);
  const auto it = values.find(name);
  return it == values.end() ? std::nullopt : it->second;
}

const std::vector<std::string>& standard_columns() {
  static const std::vector<std::string> kColumns = {
      "emi", "emi_ci_low", "emi_ci_high", "ddi", "tpl", "clientelism_flipped",
      "judicial_independence", "log_gdp_pc"};
  return kColumns;
}

std::string TableMapping::source_column(const std::string& logical) const {
  const auto it = columns.find(logical);
  return it == columns.end() ? logical : it->second;
}

std::string TableMapping::country_code(const std::string& source, int year) const {
  const auto it = country_aliases.find(source);
  std::string code = it == country_aliases.end() ? source : it->second;
  for (const auto& c : country_cases) {
    if (c.country == code && year < c.before_year) return c.code;
  }
  return code;
}

TableMapping TableMapping::from_json(const json& j) {
  TableMapping m;
  if (j.contains("columns")) m.columns = j.at("columns").get<std::map<std::string, std::string>>();
  if (j.contains("country_aliases")) {
    m.country_aliases = j.at("country_aliases").get<std::map<std::string, std::string>>();
  }
  if (j.contains("country_cases")) {
    for (const auto& c : j.at("country_cases")) {
      m.country_cases.push_back({c.at("country").get<std::string>(), c.at("before_year").get<int>(),
                                 c.at("code").get<std::string>()});
    }
  }
  return m;
}

json TableMapping::to_json() const {
  json cases = json::array();
  for (const auto& c : country_cases) {
    cases.push_back({{"country", c.country}, {"before_year", c.before_year}, {"code", c.code}});
  }
  return json{{"columns", columns}, {"country_aliases", country_aliases}, {"country_cases", cases}};
}

void to_json(json& j, const RowIssue& r) {
  j = json{{"source", r.source}, {"country", r.country}, {"year", r.year}, {"reason", r.reason}};
}

void to_json(json& j, const Coverage& c) {
  j = json{{"emi_rows", c.emi_rows},
           {"joined_rows", c.joined_rows},
           {"unmatched_emi", c.unmatched_emi},
           {"unused_indicator_rows", c.unused_indicator_rows},
           {"row_errors", c.row_errors},
           {"missing_by_column", c.missing_by_column}};
}

namespace {

using Key = std::pair<std::string, int>;

int parse_year(const std::string& text, const std::string& source, std::size_t line) {
  double y = 0.0;
  try {
    y = csv::parse_number(text);
  } catch (const std::exception&) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": bad year '" + text + "'");
  }
  if (y != std::floor(y)) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": bad year '" + text + "'");
  }
  return static_cast<int>(y);
}

struct KeyedTable {
  std::map<Key, std::map<std::string, std::optional<double>>> rows;
};

KeyedTable index_table(const csv::Table& table, const TableMapping& mapping,
                       const std::vector<std::string>& value_columns, const std::string& source) {
  const auto c_country = table.column(mapping.source_column("country"));
  const auto c_year = table.column(mapping.source_column("year"));
  std::vector<std::size_t> cols;
  for (const auto& v : value_columns) cols.push_back(table.column(mapping.source_column(v)));
  KeyedTable out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const int year = parse_year(row[c_year], source, table.lines[r]);
    const Key key{mapping.country_code(row[c_country], year), year};
    std::map<std::string, std::optional<double>> values;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      try {
        values[value_columns[k]] = csv::parse_optional_number(row[cols[k]]);
      } catch (const std::exception&) {
        throw std::runtime_error(source + ":" + std::to_string(table.lines[r]) + ": column '" +
                                 mapping.source_column(value_columns[k]) + "' is not numeric: '" +
                                 row[cols[k]] + "'");
      }
    }
    if (!out.rows.emplace(key, std::move(values)).second) {
      throw std::runtime_error(source + ": duplicate (country, year) key (" + key.first + ", " +
                               std::to_string(year) + ") at line " + std::to_string(table.lines[r]));
    }
  }
  return out;
}

}  // namespace

JoinResult join_indicators(const std::vector<YearlyStat>& emi, const csv::Table& indicators,
                           const TableMapping& indicator_mapping, const csv::Table& gdp,
                           const TableMapping& gdp_mapping) {
  const auto ind = index_table(indicators, indicator_mapping,
                               {"ddi", "tpl", "clientelism", "judicial_independence"}, "indicators");
  const auto gdp_rows = index_table(gdp, gdp_mapping, {"gdp_pc"}, "gdp");

  JoinResult out;
  out.coverage.emi_rows = emi.size();
  std::set<Key> emi_keys;
  for (const auto& e : emi) {
    const Key key{e.country, e.year};
    if (!emi_keys.insert(key).second) {
      throw std::runtime_error("emi: duplicate (country, year) key (" + e.country + ", " +
                               std::to_string(e.year) + ")");
    }
    const auto it = ind.rows.find(key);
    if (it == ind.rows.end()) {
      out.coverage.unmatched_emi.push_back({"indicators", e.country, e.year, "no indicator row"});
      continue;
    }
    PanelRow row;
    row.country = e.country;
    row.year = e.year;
    row.n_segments = e.n;
    row.set("emi", e.mean);
    row.set("emi_ci_low", e.ci_low);
    row.set("emi_ci_high", e.ci_high);
    const auto& v = it->second;
    row.set("ddi", v.at("ddi"));
    row.set("tpl", v.at("tpl"));
    const auto clientelism = v.at("clientelism");
    row.set("clientelism_flipped", clientelism ? std::optional<double>(-*clientelism) : std::nullopt);
    row.set("judicial_independence", v.at("judicial_independence"));

    std::optional<double> log_gdp;
    if (const auto g = gdp_rows.rows.find(key); g != gdp_rows.rows.end()) {
      if (const auto value = g->second.at("gdp_pc")) {
        if (*value > 0.0) {
          log_gdp = std::log(*value);
        } else {
          out.coverage.row_errors.push_back(
              {"gdp", e.country, e.year, "non-positive gdp_pc " + csv::format_number(*value)});
        }
      }
    }
    row.set("log_gdp_pc", log_gdp);
    for (const auto& [name, value] : row.values) {
      if (!value) ++out.coverage.missing_by_column[name];
    }
    out.rows.push_back(std::move(row));
  }
  for (const auto& [key, _] : ind.rows) {
    if (!emi_keys.count(key)) ++out.coverage.unused_indicator_rows;
  }
  out.coverage.joined_rows = out.rows.size();
  std::sort(out.rows.begin(), out.rows.end(), [](const PanelRow& a, const PanelRow& b) {
    return std::tie(a.country, a.year) < std::tie(b.country, b.year);
  });
  if (!out.coverage.unmatched_emi.empty()) {
    spdlog::info("panel: {} EMI country-years had no indicator row", out.coverage.unmatched_emi.size());
  }
  return out;
}

void add_lags(std::vector<PanelRow>& rows, const std::vector<std::string>& vars, int k) {
  if (k < 1) throw std::invalid_argument("add_lags: k must be >= 1");
  std::sort(rows.begin(), rows.end(), [](const PanelRow& a, const PanelRow& b) {
    return std::tie(a.country, a.year) < std::tie(b.country, b.year);
  });
  std::map<Key, std::size_t> index;
  for (std::size_t i = 0; i < rows.size(); ++i) index[{rows[i].country, rows[i].year}] = i;
  std::vector<std::map<std::string, std::optional<double>>> lagged(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto prev = index.find({rows[i].country, rows[i].year - k});
    for (const auto& v : vars) {
      lagged[i][v + "_lag" + std::to_string(k)] =
          prev == index.end() ? std::nullopt : rows[prev->second].get(v);
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto& [name, value] : lagged[i]) rows[i].set(name, value);
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> value_columns(const std::vector<PanelRow>& rows) {
  std::vector<std::string> cols = standard_columns();
  std::set<std::string> extra;
  for (const auto& r : rows) {
    for (const auto& [name, _] : r.values) {
      if (std::find(cols.begin(), cols.end(), name) == cols.end()) extra.insert(name);
    }
  }
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

}  // namespace

void write_panel_csv(std::ostream& out, const std::vector<PanelRow>& rows) {
  const auto cols = value_columns(rows);
  std::vector<std::string> header{"country", "year", "n_segments"};
  header.insert(header.end(), cols.begin(), cols.end());
  csv::write_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.country, std::to_string(r.year), std::to_string(r.n_segments)};
    for (const auto& c : cols) {
      const auto v = r.get(c);
      fields.push_back(v ? csv::format_number(*v) : "NA");
    }
    csv::write_row(out, fields);
  }
}

void write_panel_csv(const std::filesystem::path& path, const std::vector<PanelRow>& rows) {
  std::ostringstream ss;
  write_panel_csv(ss, rows);
  io::write_file_atomic(path, ss.str());
}

std::vector<PanelRow> read_panel_csv(const std::filesystem::path& path) {
  const auto table = csv::read_table(path);
  const auto c_country = table.column("country");
  const auto c_year = table.column("year");
  const auto c_n = table.column("n_segments");
  std::vector<PanelRow> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    PanelRow row;
    row.country = fields[c_country];
    row.year = parse_year(fields[c_year], path.string(), table.lines[r]);
    row.n_segments = static_cast<std::size_t>(csv::parse_number(fields[c_n]));
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == c_country || c == c_year || c == c_n) continue;
      row.set(table.header[c], csv::parse_optional_number(fields[c]));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace emi::panel
