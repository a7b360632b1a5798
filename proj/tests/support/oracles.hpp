#pragma once

// Reference computations used only by tests. Each one takes a different
// route from the library code it checks: normal equations instead of QR,
// pair counting instead of ranks, explicit demeaning instead of dummies.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emi/panel.hpp"

namespace oracle {

/// beta = (X'X)^-1 X'y via LDLT on the cross-product matrix.
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

double rss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// Two-way within estimator for a balanced panel: demean x and y by unit and
/// period means, then regress without an intercept.
double within_slope(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<int>& unit, const std::vector<int>& period);

/// AUC as the share of (positive, negative) pairs ordered correctly, ties
/// counted as one half.
double pair_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// DeLong z for two correlated AUCs computed from pairwise kernel sums.
struct DelongOracle {
  double auc_a = 0.0;
  double auc_b = 0.0;
  double var_diff = 0.0;
  double z = 0.0;
};
DelongOracle delong_pairs(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<int>& labels);

/// VIF of each column from an auxiliary regression on the others plus an
/// intercept.
std::vector<double> vif_aux(const std::vector<std::vector<double>>& columns);

/// tanh(atanh(r) +/- z / sqrt(n - 3)) with the two-sided 95% normal quantile.
std::pair<double, double> fisher_ci95(double r, std::size_t n);

/// Jarque-Bera statistic from central moments.
double jarque_bera(const std::vector<double>& x);

/// Sample mean and standard deviation (n - 1 denominator), two-pass.
std::pair<double, double> mean_sd(const std::vector<double>& x);

/// Balanced synthetic panel y = beta * x + alpha_c + gamma_t + e.
struct SyntheticPanel {
  std::vector<emi::panel::PanelRow> rows;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<int> unit;
  std::vector<int> period;
};
SyntheticPanel make_panel(std::uint64_t seed, int countries, int years, double beta, double noise_sd);

std::vector<double> normal_sample(std::uint64_t seed, std::size_t n);
std::vector<double> random_walk(std::uint64_t seed, std::size_t n);

}  // namespace oracle
