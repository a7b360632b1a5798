#include "emi/econ/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

#include "emi/util/hash.hpp"
#include "emi/util/parallel.hpp"

namespace emi::econ {

using nlohmann::json;

void to_json(json& j, const LrTest& t) { j = json{{"chi2", t.chi2}, {"df", t.df}, {"p", t.p}}; }

LrTest lr_compare(const RegressionResult& restricted, const RegressionResult& full) {
  if (restricted.n_obs != full.n_obs || restricted.rows != full.rows) {
    throw std::invalid_argument("lr_compare: models '" + restricted.spec_id + "' and '" + full.spec_id +
                                "' were fitted on different samples (" +
                                std::to_string(restricted.n_obs) + " vs " +
                                std::to_string(full.n_obs) + " rows)");
  }
  for (const auto& p : restricted.spec.predictors) {
    const auto& fp = full.spec.predictors;
    if (std::find(fp.begin(), fp.end(), p) == fp.end()) {
      throw std::invalid_argument("lr_compare: predictor '" + p + "' of '" + restricted.spec_id +
                                  "' is not in '" + full.spec_id + "'");
    }
  }
  if (full.n_params < restricted.n_params) {
    throw std::invalid_argument("lr_compare: full model has fewer parameters than restricted");
  }
  LrTest t;
  t.df = full.n_params - restricted.n_params;
  t.chi2 = static_cast<double>(full.n_obs) * std::log(restricted.rss / full.rss);
  if (t.df == 0 || t.chi2 <= 0.0) {
    t.p = 1.0;
  } else {
    t.p = boost::math::cdf(boost::math::complement(
        boost::math::chi_squared(static_cast<double>(t.df)), t.chi2));
  }
  return t;
}

Resampling parse_resampling(std::string_view text) {
  if (text == "rows") return Resampling::rows;
  if (text == "country_blocks") return Resampling::country_blocks;
  throw std::invalid_argument("unknown bootstrap resampling '" + std::string(text) + "'");
}

std::string to_string(Resampling r) { return r == Resampling::rows ? "rows" : "country_blocks"; }

void to_json(json& j, const BootstrapCoefResult& b) {
  j = json{{"target", b.target},   {"estimate", b.estimate}, {"ci_low", b.ci_low},
           {"ci_high", b.ci_high}, {"iters", b.iters},       {"used", b.used},
           {"singular", b.singular}, {"warning", b.warning}};
}

BootstrapCoefResult bootstrap_coef(const std::vector<panel::PanelRow>& panel, const RegressionSpec& spec,
                                   const std::string& target, const BootstrapCoefOptions& options) {
  spec.validate();
  if (std::find(spec.predictors.begin(), spec.predictors.end(), target) == spec.predictors.end()) {
    throw std::invalid_argument("bootstrap_coef: '" + target + "' is not a predictor of '" + spec.id + "'");
  }
  if (options.iters == 0) throw std::invalid_argument("bootstrap_coef: iters must be positive");
  const auto base = ols_fe(panel, spec);
  const auto sample = estimation_sample(panel, spec);
  const auto target_col = static_cast<Eigen::Index>(
      1 + (std::find(spec.predictors.begin(), spec.predictors.end(), target) - spec.predictors.begin()));

  std::map<std::string, std::vector<std::size_t>> blocks;
  for (const auto i : sample) blocks[panel[i].country].push_back(i);
  std::vector<const std::vector<std::size_t>*> block_list;
  for (const auto& [_, rows] : blocks) block_list.push_back(&rows);

  const std::string key = spec.id + "|" + target;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> estimates(options.iters, nan);
  parallel_for(options.iters, options.jobs, [&](std::size_t it) {
    std::mt19937_64 rng(hash::derive_seed(options.seed, key, it));
    std::vector<std::size_t> rows;
    rows.reserve(sample.size());
    if (options.scheme == Resampling::rows) {
      for (std::size_t k = 0; k < sample.size(); ++k) rows.push_back(sample[panel::draw_index(rng(), sample.size())]);
    } else {
      for (std::size_t k = 0; k < block_list.size(); ++k) {
        const auto* b = block_list[panel::draw_index(rng(), block_list.size())];
        rows.insert(rows.end(), b->begin(), b->end());
      }
    }
    const auto design = build_design(panel, spec, rows);
    const auto fit = qr_least_squares(design.X, design.y);
    if (!fit.aliased[static_cast<std::size_t>(target_col)]) estimates[it] = fit.coef(target_col);
  });

  BootstrapCoefResult out;
  out.target = target;
  out.estimate = base.coef(target).estimate;
  out.iters = options.iters;
  std::vector<double> valid;
  valid.reserve(estimates.size());
  for (const double v : estimates) {
    if (std::isfinite(v)) valid.push_back(v);
  }
  out.used = valid.size();
  out.singular = options.iters - valid.size();
  const double share = static_cast<double>(out.singular) / static_cast<double>(options.iters);
  if (share > 0.5) {
    throw std::runtime_error("bootstrap_coef: " + std::to_string(out.singular) + " of " +
                             std::to_string(options.iters) + " resamples were singular for '" + target + "'");
  }
  if (share > 0.01) {
    out.warning = std::to_string(out.singular) + " of " + std::to_string(options.iters) +
                  " resamples were singular and skipped";
    spdlog::warn("bootstrap_coef[{}]: {}", spec.id, out.warning);
  }
  std::sort(valid.begin(), valid.end());
  const double alpha = (1.0 - options.level) / 2.0;
  out.ci_low = panel::quantile_sorted(valid, alpha);
  out.ci_high = panel::quantile_sorted(valid, 1.0 - alpha);
  return out;
}

}  // namespace emi::econ
