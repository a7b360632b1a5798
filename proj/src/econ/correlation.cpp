#include "emi/econ/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace emi::econ {

void to_json(nlohmann::json& j, const Correlation& c) {
  j = nlohmann::json{{"r", c.r}, {"ci_low", c.ci_low}, {"ci_high", c.ci_high}, {"p", c.p}, {"n", c.n}};
}

double correlation_p(double r, std::size_t n) {
  if (n < 3) throw std::invalid_argument("correlation_p: need n >= 3");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
}

Correlation fisher_ci(double r, std::size_t n, double level) {
  if (n < 4) throw std::invalid_argument("fisher_ci: need n >= 4, got " + std::to_string(n));
  if (!(r >= -1.0 && r <= 1.0)) throw std::invalid_argument("fisher_ci: r outside [-1, 1]");
  Correlation c;
  c.r = r;
  c.n = n;
  c.p = correlation_p(r, n);
  if (std::abs(r) == 1.0) {
    c.ci_low = c.ci_high = r;
    return c;
  }
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - (1.0 - level) / 2.0);
  const double se = 1.0 / std::sqrt(static_cast<double>(n) - 3.0);
  const double zr = std::atanh(r);
  c.ci_low = std::tanh(zr - z * se);
  c.ci_high = std::tanh(zr + z * se);
  return c;
}

Correlation pearson_r_ci(const std::vector<double>& x, const std::vector<double>& y, double level) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson_r_ci: length mismatch");
  const std::size_t n = x.size();
  if (n < 4) throw std::invalid_argument("pearson_r_ci: need n >= 4, got " + std::to_string(n));
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw std::domain_error("pearson_r_ci: zero variance");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return fisher_ci(r, n, level);
}

}  // namespace emi::econ
