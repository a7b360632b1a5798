#include "emi/econ/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace emi::econ {

using nlohmann::json;

std::vector<double> vif(const std::vector<std::vector<double>>& columns) {
  const std::size_t p = columns.size();
  if (p < 2) throw std::invalid_argument("vif: need at least 2 predictors");
  const auto n = static_cast<Eigen::Index>(columns.front().size());
  for (const auto& c : columns) {
    if (static_cast<Eigen::Index>(c.size()) != n) throw std::invalid_argument("vif: column lengths differ");
  }
  std::vector<double> out(p);
  for (std::size_t j = 0; j < p; ++j) {
    Matrix X(n, static_cast<Eigen::Index>(p));
    Vector y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      X(r, 0) = 1.0;
      y(r) = columns[j][static_cast<std::size_t>(r)];
      Eigen::Index c = 1;
      for (std::size_t k = 0; k < p; ++k) {
        if (k != j) X(r, c++) = columns[k][static_cast<std::size_t>(r)];
      }
    }
    const double tss = (y.array() - y.mean()).square().sum();
    if (!(tss > 0.0)) {
      out[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    // Column j is collinear with the others exactly when appending it to
    // them would alias it.
    Matrix Xfull(n, static_cast<Eigen::Index>(p) + 1);
    Xfull << X, y;
    if (qr_least_squares(Xfull, y).aliased.back()) {
      out[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    const auto fit = qr_least_squares(X, y);
    const double r2 = 1.0 - fit.rss / tss;
    out[j] = r2 >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return out;
}

std::map<std::string, double> vif(const std::vector<panel::PanelRow>& panel, const RegressionSpec& spec) {
  const auto rows = estimation_sample(panel, spec);
  std::vector<std::vector<double>> columns;
  for (const auto& name : spec.predictors) {
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto i : rows) col.push_back(*panel[i].get(name));
    columns.push_back(std::move(col));
  }
  const auto values = vif(columns);
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < spec.predictors.size(); ++j) out[spec.predictors[j]] = values[j];
  return out;
}

void to_json(json& j, const UnitRootTest& t) {
  j = json{{"statistic", t.statistic}, {"p", t.p}, {"lags", t.lags}, {"n", t.n}};
}

void to_json(json& j, const NormalityTest& t) {
  j = json{{"statistic", t.statistic}, {"p", t.p}, {"skewness", t.skewness}, {"kurtosis", t.kurtosis}};
}

namespace {

// Piecewise-linear interpolation with constant extrapolation; xs ascending.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const auto lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

// Critical values of the constant-only Dickey-Fuller t statistic.
constexpr std::array<double, 8> kAdfProbs = {0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
constexpr std::array<double, 6> kAdfSizes = {25, 50, 100, 250, 500, 100000};
constexpr std::array<std::array<double, 8>, 6> kAdfTable = {{
    {-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72},
    {-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66},
    {-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63},
    {-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62},
    {-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61},
    {-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60},
}};

double adf_p_value(double statistic, std::size_t n) {
  const std::vector<double> sizes(kAdfSizes.begin(), kAdfSizes.end());
  std::vector<double> crit(kAdfProbs.size());
  for (std::size_t c = 0; c < kAdfProbs.size(); ++c) {
    std::vector<double> column;
    for (const auto& row : kAdfTable) column.push_back(row[c]);
    crit[c] = interpolate(sizes, column, static_cast<double>(n));
  }
  return interpolate(crit, std::vector<double>(kAdfProbs.begin(), kAdfProbs.end()), statistic);
}

double kpss_p_value(double statistic) {
  // Upper-tail critical values for the level case.
  static const std::vector<double> crit = {0.347, 0.463, 0.574, 0.739};
  static const std::vector<double> probs = {0.10, 0.05, 0.025, 0.01};
  return interpolate(crit, probs, statistic);
}

}  // namespace

std::size_t schwert_lags(std::size_t n) {
  return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

UnitRootTest adf_test(const std::vector<double>& series, std::optional<std::size_t> lags) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("adf_test: need at least 10 observations, got " + std::to_string(n));
  // n_eff = n - 1 - p rows, p + 2 parameters; keep n_eff - (p + 2) >= 3.
  const std::size_t max_lags = (n - 6) / 2;
  const std::size_t p = std::min(lags.value_or(schwert_lags(n)), max_lags);

  std::vector<double> dy(n - 1);
  for (std::size_t t = 1; t < n; ++t) dy[t - 1] = series[t] - series[t - 1];
  const std::size_t rows = n - 1 - p;
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + 2));
  Vector y(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + p;  // index into dy
    const auto er = static_cast<Eigen::Index>(r);
    y(er) = dy[t];
    X(er, 0) = 1.0;
    X(er, 1) = series[t];  // level y_{t-1} for the difference dy[t] = y[t+1] - y[t]
    for (std::size_t i = 1; i <= p; ++i) X(er, static_cast<Eigen::Index>(1 + i)) = dy[t - i];
  }
  const auto fit = qr_least_squares(X, y);
  if (fit.aliased[1]) throw std::runtime_error("adf_test: lagged level is collinear (constant series?)");
  const double dof = static_cast<double>(rows) - static_cast<double>(fit.rank());
  const double s2 = fit.rss / dof;
  // Position of the level column among the kept columns.
  const auto pos = static_cast<Eigen::Index>(
      std::find(fit.kept.begin(), fit.kept.end(), std::size_t{1}) - fit.kept.begin());
  const double se = std::sqrt(s2 * fit.cov_unscaled(pos, pos));
  UnitRootTest out;
  out.statistic = fit.coef(1) / se;
  out.lags = p;
  out.n = n;
  out.p = adf_p_value(out.statistic, n - 1);
  return out;
}

UnitRootTest kpss_test(const std::vector<double>& series, std::optional<std::size_t> lags) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("kpss_test: need at least 10 observations, got " + std::to_string(n));
  const std::size_t l = std::min(
      lags.value_or(static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)))),
      n - 1);
  double mean = 0.0;
  for (const double v : series) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> e(n);
  for (std::size_t t = 0; t < n; ++t) e[t] = series[t] - mean;

  double eta = 0.0;
  double partial = 0.0;
  for (const double v : e) {
    partial += v;
    eta += partial * partial;
  }
  const double nn = static_cast<double>(n);
  eta /= nn * nn;

  double s2 = 0.0;
  for (const double v : e) s2 += v * v;
  for (std::size_t s = 1; s <= l; ++s) {
    double gamma = 0.0;
    for (std::size_t t = s; t < n; ++t) gamma += e[t] * e[t - s];
    s2 += 2.0 * (1.0 - static_cast<double>(s) / static_cast<double>(l + 1)) * gamma;
  }
  s2 /= nn;
  if (!(s2 > 0.0)) throw std::domain_error("kpss_test: zero long-run variance");

  UnitRootTest out;
  out.statistic = eta / s2;
  out.lags = l;
  out.n = n;
  out.p = kpss_p_value(out.statistic);
  return out;
}

NormalityTest jarque_bera(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 8) throw std::invalid_argument("jarque_bera: need at least 8 observations, got " + std::to_string(n));
  double mean = 0.0;
  for (const double v : series) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (const double v : series) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double nn = static_cast<double>(n);
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  if (!(m2 > 0.0)) throw std::domain_error("jarque_bera: zero variance");
  NormalityTest out;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.kurtosis = m4 / (m2 * m2);
  const double excess = out.kurtosis - 3.0;
  out.statistic = nn / 6.0 * (out.skewness * out.skewness + excess * excess / 4.0);
  out.p = std::exp(-out.statistic / 2.0);  // chi-square(2) survival function
  return out;
}

void to_json(json& j, const DiagnosticsReport& d) {
  json vifs = json::object();
  for (const auto& [name, v] : d.vif) vifs[name] = std::isinf(v) ? json("Inf") : json(v);
  j = json{{"vif", vifs}, {"notes", d.notes}};
  j["adf"] = d.adf ? json(*d.adf) : json(nullptr);
  j["kpss"] = d.kpss ? json(*d.kpss) : json(nullptr);
  j["jarque_bera"] = d.jb ? json(*d.jb) : json(nullptr);
}

DiagnosticsReport diagnose(const std::vector<panel::PanelRow>& panel, const RegressionResult& result) {
  DiagnosticsReport d;
  if (result.spec.predictors.size() >= 2) d.vif = vif(panel, result.spec);
  const auto& e = result.residuals;
  auto attempt = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& ex) {
      d.notes.push_back(std::string(name) + ": " + ex.what());
    }
  };
  attempt("adf", [&] { d.adf = adf_test(e); });
  attempt("kpss", [&] { d.kpss = kpss_test(e); });
  attempt("jarque_bera", [&] { d.jb = jarque_bera(e); });
  return d;
}

}  // namespace emi::econ
