#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emi/econ/ols.hpp"

namespace emi::econ {

/// VIF_j = 1 / (1 - R_j^2) from regressing column j on the others plus an
/// intercept. Perfectly collinear columns get +infinity.
[[nodiscard]] std::vector<double> vif(const std::vector<std::vector<double>>& columns);

/// VIF over the substantive predictors of `spec` on its estimation sample
/// (fixed-effect dummies excluded). Needs at least two predictors.
[[nodiscard]] std::map<std::string, double> vif(const std::vector<panel::PanelRow>& panel,
                                                const RegressionSpec& spec);

struct UnitRootTest {
  double statistic = 0.0;
  double p = 1.0;
  std::size_t lags = 0;
  std::size_t n = 0;
};

void to_json(nlohmann::json& j, const UnitRootTest& t);

/// Schwert lag rule floor(12 (n/100)^(1/4)).
[[nodiscard]] std::size_t schwert_lags(std::size_t n);

/// Augmented Dickey-Fuller with a constant. Lag order defaults to the
/// Schwert rule, capped so the test regression keeps at least three
/// residual degrees of freedom. p is interpolated from the Dickey-Fuller
/// table and bounded to [0.01, 0.99].
[[nodiscard]] UnitRootTest adf_test(const std::vector<double>& series,
                                    std::optional<std::size_t> lags = std::nullopt);

/// KPSS level-stationarity test with a Bartlett-kernel long-run variance
/// and bandwidth floor(4 (n/100)^(1/4)). p is interpolated from the KPSS
/// table and bounded to [0.01, 0.10].
[[nodiscard]] UnitRootTest kpss_test(const std::vector<double>& series,
                                     std::optional<std::size_t> lags = std::nullopt);

struct NormalityTest {
  double statistic = 0.0;
  double p = 1.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

void to_json(nlohmann::json& j, const NormalityTest& t);

/// JB = n/6 (S^2 + (K - 3)^2 / 4) with moment-based skewness and kurtosis;
/// p from the chi-square(2) upper tail.
[[nodiscard]] NormalityTest jarque_bera(const std::vector<double>& series);

struct DiagnosticsReport {
  std::map<std::string, double> vif;
  std::optional<UnitRootTest> adf;
  std::optional<UnitRootTest> kpss;
  std::optional<NormalityTest> jb;
  std::vector<std::string> notes;
};

void to_json(nlohmann::json& j, const DiagnosticsReport& d);

/// VIF (when there are two or more predictors) plus ADF, KPSS and JB on the
/// residual series in panel (country, year) order.
[[nodiscard]] DiagnosticsReport diagnose(const std::vector<panel::PanelRow>& panel,
                                         const RegressionResult& result);

}  // namespace emi::econ
