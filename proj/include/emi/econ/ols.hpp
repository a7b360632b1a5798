#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "emi/econ/linalg.hpp"
#include "emi/panel.hpp"

namespace emi::econ {

struct FixedEffects {
  bool country = false;
  bool year = false;
};

struct RegressionSpec {
  std::string id;
  std::string outcome;
  std::vector<std::string> predictors;
  FixedEffects fixed_effects;
  /// Extra fields that must be non-missing for a row to enter the sample,
  /// e.g. a lag column so nested models share one sample.
  std::vector<std::string> require_nonmissing;

  /// Throws std::invalid_argument when the outcome is also a predictor or
  /// there is nothing on the right-hand side.
  void validate() const;
};

void to_json(nlohmann::json& j, const RegressionSpec& s);
void from_json(const nlohmann::json& j, RegressionSpec& s);

class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, std::vector<std::string> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}
  [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class ZeroVarianceOutcome : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Design matrix [intercept | predictors | country dummies | year dummies].
/// The reference level of each family (alphabetically first country,
/// earliest year) gets no dummy.
struct Design {
  Matrix X;
  Vector y;
  std::vector<std::string> columns;
  std::vector<std::size_t> rows;  // panel row index of each observation
};

/// Rows passing listwise deletion on the outcome, predictors and required
/// fields, in panel order.
[[nodiscard]] std::vector<std::size_t> estimation_sample(const std::vector<panel::PanelRow>& panel,
                                                         const RegressionSpec& spec);

/// Builds the design over the given panel row indices (duplicates allowed).
[[nodiscard]] Design build_design(const std::vector<panel::PanelRow>& panel,
                                  const RegressionSpec& spec, const std::vector<std::size_t>& rows);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

void to_json(nlohmann::json& j, const Coefficient& c);

struct RegressionResult {
  std::string spec_id;
  RegressionSpec spec;
  std::vector<Coefficient> coefficients;  // intercept and predictors
  std::size_t n_fixed_effects = 0;        // dummy columns
  std::size_t n_obs = 0;
  std::size_t n_params = 0;
  std::size_t df_resid = 0;
  double rss = 0.0;
  double tss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;
  double f_p = 1.0;
  double sigma = 0.0;
  std::vector<double> residuals;
  std::vector<std::size_t> rows;

  [[nodiscard]] const Coefficient& coef(const std::string& name) const;
};

void to_json(nlohmann::json& j, const RegressionResult& r);

/// Fits an already built design. Aliased columns raise RankDeficientError
/// naming them; a constant outcome raises ZeroVarianceOutcome.
[[nodiscard]] RegressionResult fit_design(const Design& design, const RegressionSpec& spec,
                                          double level = 0.95);

/// OLS with dummy-variable fixed effects and conventional standard errors
/// (n - k degrees of freedom).
[[nodiscard]] RegressionResult ols_fe(const std::vector<panel::PanelRow>& panel,
                                      const RegressionSpec& spec, double level = 0.95);

}  // namespace emi::econ
