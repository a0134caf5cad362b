#ifndef GEODENSITY_GAUSS_HPP
#define GEODENSITY_GAUSS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace geodensity {

template <class Real>
using RealVec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

namespace detail {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence, weights are mu0 * (first eigenvector
// component)^2.
template <class Real>
std::pair<RealVec<Real>, RealVec<Real>> golub_welsch(const RealVec<Real>& diag,
                                                     const RealVec<Real>& subdiag,
                                                     Real mu0) {
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = diag.size();
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeFromTridiagonal(diag, subdiag.size() ? subdiag : RealVec<Real>::Zero(0),
                            Eigen::ComputeEigenvectors);
  RealVec<Real> nodes = es.eigenvalues();
  RealVec<Real> weights(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Real v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
  return {std::move(nodes), std::move(weights)};
}

}  // namespace detail

/// m-point Gauss-Legendre rule mapped to [0,1]; weights sum to 1.
template <class Real>
std::pair<RealVec<Real>, RealVec<Real>> gauss_legendre_nodes(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre_nodes: m must be >= 1");
  RealVec<Real> diag = RealVec<Real>::Zero(m);
  RealVec<Real> sub(m > 1 ? m - 1 : 0);
  for (int k = 1; k < m; ++k) {
    Real kk = static_cast<Real>(k);
    sub[k - 1] = kk / std::sqrt(Real(4) * kk * kk - Real(1));
  }
  auto [x, w] = detail::golub_welsch<Real>(diag, sub, Real(2));
  for (int i = 0; i < m; ++i) {
    x[i] = (x[i] + Real(1)) / Real(2);
    w[i] /= Real(2);
  }
  return {std::move(x), std::move(w)};
}

/// m-point Gauss-Laguerre rule for the weight e^{-y} on [0,inf).
template <class Real>
std::pair<RealVec<Real>, RealVec<Real>> gauss_laguerre_nodes(int m) {
  if (m < 1) throw std::invalid_argument("gauss_laguerre_nodes: m must be >= 1");
  RealVec<Real> diag(m);
  RealVec<Real> sub(m > 1 ? m - 1 : 0);
  for (int k = 0; k < m; ++k) diag[k] = Real(2 * k + 1);
  for (int k = 1; k < m; ++k) sub[k - 1] = Real(k);
  return detail::golub_welsch<Real>(diag, sub, Real(1));
}

}  // namespace geodensity

#endif
