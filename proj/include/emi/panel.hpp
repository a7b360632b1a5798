#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emi/corpus.hpp"
#include "emi/fusion.hpp"
#include "emi/util/csv.hpp"

namespace emi::panel {

// ---------------------------------------------------------------------------
// Yearly aggregation

struct YearlyStat {
  std::string country;
  int year = 0;
  double mean = 0.0;
  std::size_t n = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Arithmetic mean and count of segment EMI per (country, year), sorted by
/// key. CI fields are set to the mean.
[[nodiscard]] std::vector<YearlyStat> yearly_mean(const std::vector<fusion::SegmentScore>& scores);

/// Uniform index in [0, n) from one 64-bit draw (multiply-high mapping).
[[nodiscard]] inline std::size_t draw_index(std::uint64_t bits, std::size_t n) noexcept {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

/// Type-7 (linear interpolation) quantile of sorted data.
[[nodiscard]] double quantile_sorted(const std::vector<double>& sorted, double p);

struct BootstrapOptions {
  std::size_t iters = 10000;
  double level = 0.95;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
};

/// Percentile CI of the resampled mean. Iteration i draws from an
/// mt19937_64 seeded with derive_seed(seed, key, i), so results do not
/// depend on `jobs`.
[[nodiscard]] std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values,
                                                          const BootstrapOptions& options,
                                                          std::string_view key = {});

/// yearly_mean plus a bootstrap CI per (country, year) keyed "CC:YYYY".
[[nodiscard]] std::vector<YearlyStat> aggregate_years(const std::vector<fusion::SegmentScore>& scores,
                                                      const BootstrapOptions& options);

// ---------------------------------------------------------------------------
// Panel rows

struct PanelRow {
  std::string country;
  int year = 0;
  std::size_t n_segments = 0;
  std::map<std::string, std::optional<double>> values;

  /// Any numeric field by name, including "year" and "n_segments"; nullopt
  /// when missing or unknown.
  [[nodiscard]] std::optional<double> get(const std::string& name) const;
  void set(const std::string& name, std::optional<double> value) { values[name] = value; }
};

/// Value columns written before any others, in this order.
[[nodiscard]] const std::vector<std::string>& standard_columns();

// ---------------------------------------------------------------------------
// Indicator join

/// Maps logical columns to source columns and source country labels to
/// panel codes. Year-split cases (e.g. DE before 1990 -> DE_W) apply after
/// aliasing.
struct TableMapping {
  std::map<std::string, std::string> columns;
  std::map<std::string, std::string> country_aliases;
  std::vector<corpus::CountryCase> country_cases;

  [[nodiscard]] std::string source_column(const std::string& logical) const;
  [[nodiscard]] std::string country_code(const std::string& source, int year) const;
  [[nodiscard]] static TableMapping from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

struct RowIssue {
  std::string source;
  std::string country;
  int year = 0;
  std::string reason;
};

void to_json(nlohmann::json& j, const RowIssue& r);

struct Coverage {
  std::size_t emi_rows = 0;
  std::size_t joined_rows = 0;
  std::vector<RowIssue> unmatched_emi;      // no indicator row for the key
  std::size_t unused_indicator_rows = 0;
  std::vector<RowIssue> row_errors;         // e.g. non-positive GDP
  std::map<std::string, std::size_t> missing_by_column;
};

void to_json(nlohmann::json& j, const Coverage& c);

struct JoinResult {
  std::vector<PanelRow> rows;  // sorted by (country, year)
  Coverage coverage;
};

/// Inner join of EMI rows with the indicator table on (country, year); GDP
/// is a left join. clientelism_flipped = -clientelism and log_gdp_pc =
/// ln(gdp_pc). Missing source values stay missing. Throws on a duplicate key
/// within a source.
[[nodiscard]] JoinResult join_indicators(const std::vector<YearlyStat>& emi,
                                         const csv::Table& indicators,
                                         const TableMapping& indicator_mapping,
                                         const csv::Table& gdp, const TableMapping& gdp_mapping);

/// Adds `<var>_lag<k>` holding the value at year t-k of the same country;
/// missing when that year is absent. Sorts rows by (country, year).
void add_lags(std::vector<PanelRow>& rows, const std::vector<std::string>& vars, int k = 1);

// ---------------------------------------------------------------------------
// CSV

void write_panel_csv(std::ostream& out, const std::vector<PanelRow>& rows);
void write_panel_csv(const std::filesystem::path& path, const std::vector<PanelRow>& rows);
[[nodiscard]] std::vector<PanelRow> read_panel_csv(const std::filesystem::path& path);

}  // namespace emi::panel
