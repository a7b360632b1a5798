#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace emi::econ {

struct AucResult {
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double variance = 0.0;  // DeLong variance
};

void to_json(nlohmann::json& j, const AucResult& a);

/// Midranks of `values` (1-based; tied values share the mean rank).
[[nodiscard]] std::vector<double> midranks(const std::vector<double>& values);

/// Mann-Whitney AUC via midranks; ties between classes count one half.
/// Labels are 0/1. Throws when either class is empty.
[[nodiscard]] AucResult auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct DelongResult {
  double auc_a = 0.0;
  double auc_b = 0.0;
  double z = 0.0;
  double p = 1.0;
  double var_diff = 0.0;
};

void to_json(nlohmann::json& j, const DelongResult& d);

/// DeLong paired comparison of two AUCs on the same labelled cases using
/// the V10/V01 structural components.
[[nodiscard]] DelongResult delong_compare(const std::vector<double>& scores_a,
                                          const std::vector<double>& scores_b,
                                          const std::vector<int>& labels);

}  // namespace emi::econ
