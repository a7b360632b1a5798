#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emi/econ/ols.hpp"

namespace emi::econ {

struct LrTest {
  double chi2 = 0.0;
  std::size_t df = 0;
  double p = 1.0;
};

void to_json(nlohmann::json& j, const LrTest& t);

/// Gaussian likelihood-ratio test of nested fits on the same sample:
/// chi2 = n ln(RSS_r / RSS_f), df = difference in parameter counts.
[[nodiscard]] LrTest lr_compare(const RegressionResult& restricted, const RegressionResult& full);

enum class Resampling { rows, country_blocks };

[[nodiscard]] Resampling parse_resampling(std::string_view text);
[[nodiscard]] std::string to_string(Resampling r);

struct BootstrapCoefOptions {
  std::size_t iters = 10000;
  double level = 0.95;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  Resampling scheme = Resampling::rows;
};

struct BootstrapCoefResult {
  std::string target;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t iters = 0;
  std::size_t used = 0;
  std::size_t singular = 0;
  std::string warning;
};

void to_json(nlohmann::json& j, const BootstrapCoefResult& b);

/// Percentile CI of one coefficient over refits on resampled estimation
/// samples. Each resample rebuilds its dummies from the levels it contains;
/// nuisance columns that become collinear are dropped, and a resample counts
/// as singular only when the target itself is not estimable. Iteration i
/// uses derive_seed(seed, spec.id + "|" + target, i), so results do not
/// depend on `jobs`. More than 50% singular resamples is an error; more
/// than 1% sets `warning`.
[[nodiscard]] BootstrapCoefResult bootstrap_coef(const std::vector<panel::PanelRow>& panel,
                                                 const RegressionSpec& spec, const std::string& target,
                                                 const BootstrapCoefOptions& options = {});

}  // namespace emi::econ
