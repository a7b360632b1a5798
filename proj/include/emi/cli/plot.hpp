#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emi/cli/config.hpp"
#include "emi/panel.hpp"

namespace emi::cli {

/// Line fit y = intercept + slope * x by least squares, with the pieces
/// needed for a confidence band on the mean response.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double x_mean = 0.0;
  double sxx = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;

  [[nodiscard]] double at(double x) const { return intercept + slope * x; }
  /// Half-width of the two-sided confidence band for the mean at x.
  [[nodiscard]] double band(double x, double level = 0.95) const;
};

/// Needs at least three points with non-constant x.
[[nodiscard]] std::optional<LineFit> fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Tick positions at 1/2/5 x 10^k steps covering [lo, hi].
[[nodiscard]] std::vector<double> nice_ticks(double lo, double hi, int target = 5);

/// EMI with its CI band on the left axis and `indicator` on the right axis
/// for one country's rows (sorted by year); events draw dashed vertical lines.
[[nodiscard]] std::string trend_svg(const std::string& country, const std::vector<panel::PanelRow>& rows,
                                    const std::string& indicator, const std::vector<PlotEvent>& events,
                                    const std::string& provenance);

/// Pooled scatter of EMI against `indicator`, per-country dashed fits and a
/// solid overall fit with its 95% band.
[[nodiscard]] std::string scatter_svg(const std::vector<panel::PanelRow>& rows, const std::string& indicator,
                                      const std::string& provenance);

}  // namespace emi::cli
