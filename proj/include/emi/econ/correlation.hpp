#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace emi::econ {

struct Correlation {
  double r = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

void to_json(nlohmann::json& j, const Correlation& c);

/// Fisher z interval for a correlation r from n pairs: tanh(atanh(r) -/+ z/sqrt(n - 3)).
[[nodiscard]] Correlation fisher_ci(double r, std::size_t n, double level = 0.95);

/// Two-sided p of t = r sqrt(n - 2) / sqrt(1 - r^2) with n - 2 df.
[[nodiscard]] double correlation_p(double r, std::size_t n);

/// Sample Pearson r with Fisher CI and t-test p. Requires n >= 4 and
/// non-zero variance in both series.
[[nodiscard]] Correlation pearson_r_ci(const std::vector<double>& x, const std::vector<double>& y,
                                       double level = 0.95);

}  // namespace emi::econ
