#include "emi/econ/ols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace emi::econ {

using nlohmann::json;

void RegressionSpec::validate() const {
  if (outcome.empty()) throw std::invalid_argument("regression spec '" + id + "': no outcome");
  if (std::find(predictors.begin(), predictors.end(), outcome) != predictors.end()) {
    throw std::invalid_argument("regression spec '" + id + "': outcome '" + outcome +
                                "' is also a predictor");
  }
  if (predictors.empty() && !fixed_effects.country && !fixed_effects.year) {
    throw std::invalid_argument("regression spec '" + id + "': no predictors or fixed effects");
  }
  std::set<std::string> seen;
  for (const auto& p : predictors) {
    if (!seen.insert(p).second) {
      throw std::invalid_argument("regression spec '" + id + "': duplicate predictor '" + p + "'");
    }
  }
}

void to_json(json& j, const RegressionSpec& s) {
  json fe = json::array();
  if (s.fixed_effects.country) fe.push_back("country");
  if (s.fixed_effects.year) fe.push_back("year");
  j = json{{"id", s.id},
           {"outcome", s.outcome},
           {"predictors", s.predictors},
           {"fixed_effects", fe},
           {"require_nonmissing", s.require_nonmissing}};
}

void from_json(const json& j, RegressionSpec& s) {
  s.id = j.at("id").get<std::string>();
  s.outcome = j.at("outcome").get<std::string>();
  s.predictors = j.value("predictors", std::vector<std::string>{});
  s.fixed_effects = {};
  for (const auto& fe : j.value("fixed_effects", std::vector<std::string>{})) {
    if (fe == "country") s.fixed_effects.country = true;
    else if (fe == "year") s.fixed_effects.year = true;
    else throw std::invalid_argument("regression spec '" + s.id + "': unknown fixed effect '" + fe + "'");
  }
  s.require_nonmissing = j.value("require_nonmissing", std::vector<std::string>{});
}

std::vector<std::size_t> estimation_sample(const std::vector<panel::PanelRow>& panel,
                                           const RegressionSpec& spec) {
  std::vector<std::string> fields{spec.outcome};
  fields.insert(fields.end(), spec.predictors.begin(), spec.predictors.end());
  fields.insert(fields.end(), spec.require_nonmissing.begin(), spec.require_nonmissing.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const bool complete = std::all_of(fields.begin(), fields.end(), [&](const std::string& f) {
      const auto v = panel[i].get(f);
      return v && std::isfinite(*v);
    });
    if (complete) rows.push_back(i);
  }
  return rows;
}

Design build_design(const std::vector<panel::PanelRow>& panel, const RegressionSpec& spec,
                    const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw std::runtime_error("regression '" + spec.id + "': empty sample");
  std::set<std::string> countries;
  std::set<int> years;
  for (const auto i : rows) {
    countries.insert(panel[i].country);
    years.insert(panel[i].year);
  }
  std::vector<std::string> country_levels;
  std::vector<int> year_levels;
  if (spec.fixed_effects.country) country_levels.assign(std::next(countries.begin()), countries.end());
  if (spec.fixed_effects.year) year_levels.assign(std::next(years.begin()), years.end());

  Design d;
  d.columns.push_back("(Intercept)");
  d.columns.insert(d.columns.end(), spec.predictors.begin(), spec.predictors.end());
  for (const auto& c : country_levels) d.columns.push_back("country[" + c + "]");
  for (const auto y : year_levels) d.columns.push_back("year[" + std::to_string(y) + "]");

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto n_pred = static_cast<Eigen::Index>(spec.predictors.size());
  d.X = Matrix::Zero(n, static_cast<Eigen::Index>(d.columns.size()));
  d.y.resize(n);
  std::map<std::string, Eigen::Index> country_col;
  for (std::size_t k = 0; k < country_levels.size(); ++k) {
    country_col[country_levels[k]] = 1 + n_pred + static_cast<Eigen::Index>(k);
  }
  std::map<int, Eigen::Index> year_col;
  for (std::size_t k = 0; k < year_levels.size(); ++k) {
    year_col[year_levels[k]] =
        1 + n_pred + static_cast<Eigen::Index>(country_levels.size() + k);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = panel[rows[static_cast<std::size_t>(r)]];
    const auto outcome = row.get(spec.outcome);
    if (!outcome) throw std::runtime_error("regression '" + spec.id + "': missing outcome in sample");
    d.y(r) = *outcome;
    d.X(r, 0) = 1.0;
    for (Eigen::Index k = 0; k < n_pred; ++k) {
      const auto v = row.get(spec.predictors[static_cast<std::size_t>(k)]);
      if (!v) throw std::runtime_error("regression '" + spec.id + "': missing predictor in sample");
      d.X(r, 1 + k) = *v;
    }
    if (const auto it = country_col.find(row.country); it != country_col.end()) d.X(r, it->second) = 1.0;
    if (const auto it = year_col.find(row.year); it != year_col.end()) d.X(r, it->second) = 1.0;
  }
  d.rows = rows;
  return d;
}

void to_json(json& j, const Coefficient& c) {
  j = json{{"name", c.name}, {"estimate", c.estimate}, {"std_error", c.std_error}, {"t", c.t},
           {"p", c.p},       {"ci_low", c.ci_low},     {"ci_high", c.ci_high}};
}

const Coefficient& RegressionResult::coef(const std::string& name) const {
  for (const auto& c : coefficients) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("regression '" + spec_id + "' has no coefficient '" + name + "'");
}

void to_json(json& j, const RegressionResult& r) {
  j = json{{"id", r.spec_id},
           {"spec", r.spec},
           {"coefficients", r.coefficients},
           {"n_fixed_effects", r.n_fixed_effects},
           {"n_obs", r.n_obs},
           {"n_params", r.n_params},
           {"df_resid", r.df_resid},
           {"rss", r.rss},
           {"r2", r.r2},
           {"adj_r2", r.adj_r2},
           {"f_stat", r.f_stat},
           {"f_p", r.f_p},
           {"sigma", r.sigma}};
}

RegressionResult fit_design(const Design& design, const RegressionSpec& spec, double level) {
  const auto n = static_cast<std::size_t>(design.X.rows());
  const auto k = static_cast<std::size_t>(design.X.cols());
  if (n <= k) {
    throw std::runtime_error("regression '" + spec.id + "': " + std::to_string(n) +
                             " observations for " + std::to_string(k) + " parameters");
  }
  const double ybar = design.y.mean();
  const double tss = (design.y.array() - ybar).square().sum();
  if (!(tss > 0.0)) {
    throw ZeroVarianceOutcome("regression '" + spec.id + "': outcome '" + spec.outcome +
                              "' has zero variance in the sample");
  }
  const auto fit = qr_least_squares(design.X, design.y);
  std::vector<std::string> aliased;
  for (std::size_t c = 0; c < k; ++c) {
    if (fit.aliased[c]) aliased.push_back(design.columns[c]);
  }
  if (!aliased.empty()) {
    std::string names;
    for (const auto& a : aliased) names += (names.empty() ? "" : ", ") + a;
    throw RankDeficientError("regression '" + spec.id + "': design is rank deficient; collinear column(s): " + names,
                             aliased);
  }

  RegressionResult r;
  r.spec_id = spec.id;
  r.spec = spec;
  r.n_obs = n;
  r.n_params = k;
  r.df_resid = n - k;
  r.rss = fit.rss;
  r.tss = tss;
  r.r2 = 1.0 - fit.rss / tss;
  r.adj_r2 = 1.0 - (1.0 - r.r2) * static_cast<double>(n - 1) / static_cast<double>(r.df_resid);
  const double s2 = fit.rss / static_cast<double>(r.df_resid);
  r.sigma = std::sqrt(s2);
  if (k > 1) {
    const double df1 = static_cast<double>(k - 1);
    const double df2 = static_cast<double>(r.df_resid);
    r.f_stat = ((tss - fit.rss) / df1) / s2;
    r.f_p = boost::math::cdf(boost::math::complement(boost::math::fisher_f(df1, df2), std::max(0.0, r.f_stat)));
  }
  const boost::math::students_t tdist(static_cast<double>(r.df_resid));
  const double tcrit = boost::math::quantile(boost::math::complement(tdist, (1.0 - level) / 2.0));
  const std::size_t n_listed = 1 + spec.predictors.size();
  r.n_fixed_effects = k - n_listed;
  for (std::size_t c = 0; c < n_listed; ++c) {
    Coefficient co;
    co.name = design.columns[c];
    co.estimate = fit.coef(static_cast<Eigen::Index>(c));
    const auto ci = static_cast<Eigen::Index>(c);  // no aliasing: kept == identity
    co.std_error = std::sqrt(s2 * fit.cov_unscaled(ci, ci));
    co.t = co.std_error > 0.0 ? co.estimate / co.std_error : 0.0;
    co.p = co.std_error > 0.0
               ? 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(co.t)))
               : (co.estimate == 0.0 ? 1.0 : 0.0);
    co.ci_low = co.estimate - tcrit * co.std_error;
    co.ci_high = co.estimate + tcrit * co.std_error;
    r.coefficients.push_back(std::move(co));
  }
  r.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
  r.rows = design.rows;
  return r;
}

RegressionResult ols_fe(const std::vector<panel::PanelRow>& panel, const RegressionSpec& spec,
                        double level) {
  spec.validate();
  const auto rows = estimation_sample(panel, spec);
  return fit_design(build_design(panel, spec, rows), spec, level);
}

}  // namespace emi::econ
