#pragma once

#include <string>

#include "emi/econ/model_spec.hpp"

namespace emi::cli {

/// Significance marker used in place of bold type: "*" when p < 0.05.
[[nodiscard]] std::string significance_marker(double p);

/// "p=0.006" for p >= 0.001, scientific ("p=1.451e-04") below.
[[nodiscard]] std::string format_p(double p);

/// Plain-text regression tables, one per table group (estimate, CI and p
/// stacked per variable, then Num.Obs, R2, R2 Adj. and F), followed by
/// diagnostics, model comparisons, bootstrap intervals and correlations.
[[nodiscard]] std::string render_analysis(const econ::AnalysisReport& report,
                                          const econ::ModelSpecFile& spec);

}  // namespace emi::cli
