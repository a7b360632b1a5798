#include "emi/econ/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace emi::econ {

QrFit qr_least_squares(const Matrix& X, const Vector& y, double tol) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (y.size() != n) throw std::invalid_argument("qr_least_squares: X and y row counts differ");
  if (n == 0) throw std::invalid_argument("qr_least_squares: no observations");

  Matrix A = X;
  Vector qty = y;
  QrFit fit;
  fit.aliased.assign(static_cast<std::size_t>(p), false);

  Eigen::Index k = 0;  // rank so far
  for (Eigen::Index j = 0; j < p; ++j) {
    const double original = X.col(j).norm();
    if (k >= n) {
      fit.aliased[static_cast<std::size_t>(j)] = true;
      continue;
    }
    auto tail = A.col(j).segment(k, n - k);
    const double rnorm = tail.norm();
    if (original == 0.0 || rnorm < tol * original) {
      fit.aliased[static_cast<std::size_t>(j)] = true;
      continue;
    }
    // Bring column j to position k so the kept block stays contiguous.
    if (j != k) A.col(k).swap(A.col(j));
    Vector v = A.col(k).segment(k, n - k);
    const double alpha = v(0) >= 0.0 ? -rnorm : rnorm;
    v(0) -= alpha;
    const double vnorm2 = v.squaredNorm();
    if (vnorm2 > 0.0) {
      const double beta = 2.0 / vnorm2;
      for (Eigen::Index c = k; c < p; ++c) {
        auto col = A.col(c).segment(k, n - k);
        col -= (beta * v.dot(col)) * v;
      }
      auto qt = qty.segment(k, n - k);
      qt -= (beta * v.dot(qt)) * v;
    }
    A(k, k) = alpha;
    A.col(k).segment(k + 1, n - k - 1).setZero();
    fit.kept.push_back(static_cast<std::size_t>(j));
    ++k;
  }

  const Matrix R = A.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Vector b = R.triangularView<Eigen::Upper>().solve(qty.head(k));
  const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  fit.cov_unscaled = Rinv * Rinv.transpose();

  fit.coef = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  Matrix Xk(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    fit.coef(static_cast<Eigen::Index>(fit.kept[static_cast<std::size_t>(i)])) = b(i);
    Xk.col(i) = X.col(static_cast<Eigen::Index>(fit.kept[static_cast<std::size_t>(i)]));
  }
  fit.fitted = Xk * b;
  fit.residuals = y - fit.fitted;
  fit.rss = fit.residuals.squaredNorm();
  return fit;
}

}  // namespace emi::econ
