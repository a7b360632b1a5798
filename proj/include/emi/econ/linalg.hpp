#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace emi::econ {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Least-squares fit by Householder QR taken in column order. A column whose
/// norm after projecting out the earlier accepted columns falls below
/// `tol` times its original norm is aliased and gets no coefficient.
struct QrFit {
  Vector coef;                 // NaN at aliased columns
  std::vector<bool> aliased;
  std::vector<std::size_t> kept;  // accepted column indices, in order
  Matrix cov_unscaled;         // (R'R)^-1 over `kept`
  Vector fitted;
  Vector residuals;
  double rss = 0.0;

  [[nodiscard]] std::size_t rank() const noexcept { return kept.size(); }
};

inline constexpr double kRankTolerance = 1e-10;

[[nodiscard]] QrFit qr_least_squares(const Matrix& X, const Vector& y, double tol = kRankTolerance);

}  // namespace emi::econ
