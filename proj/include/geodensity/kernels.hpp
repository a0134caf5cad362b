#ifndef GEODENSITY_KERNELS_HPP
#define GEODENSITY_KERNELS_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include "geodensity/types.hpp"

namespace geodensity::kernels {

/// Raised when an integrand factor hits (or nearly hits) a pole.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Concatenation (w_1,...,w_n,w'_1,...,w'_n').
template <class Real>
CVec<Real> vec_concat(const CVec<Real>& a, const CVec<Real>& b) {
  CVec<Real> out(a.size() + b.size());
  out << a, b;
  return out;
}

namespace detail {

template <class Real>
bool near_coincident(const std::complex<Real>& a, const std::complex<Real>& b) {
  return std::abs(a - b) < Real(1e-13) * (Real(1) + std::abs(a));
}

}  // namespace detail

/// Cauchy determinant det[1/(w_i - w'_j)] via the closed product form
///   (-1)^{n(n-1)/2} prod_{i<j}(w_i-w_j)(w'_i-w'_j) / prod_{i,j}(w_i-w'_j).
/// Falls back to log-magnitude + unit-phase accumulation when the direct
/// product leaves [1e-150, 1e150].
template <class Real>
std::complex<Real> cauchy_det(const CVec<Real>& w, const CVec<Real>& wp) {
  using C = std::complex<Real>;
  const Eigen::Index n = w.size();
  if (n != wp.size())
    throw std::invalid_argument("cauchy_det: dimensions of the two vectors must be equal");
  if (n == 0) throw std::invalid_argument("cauchy_det: vectors must be nonempty");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (detail::near_coincident(w[i], wp[j]))
        throw SingularityError("cauchy_det: coincident entries w_i = w'_j");

  const Real lo = Real(1e-150), hi = Real(1e150);
  C acc = (n * (n - 1) / 2) % 2 ? C(-1) : C(1);
  bool ranged = true;
  for (Eigen::Index i = 0; i < n && ranged; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      acc *= (w[i] - w[j]) * (wp[i] - wp[j]);
      Real m = std::abs(acc);
      if (!(m > lo && m < hi)) {
        ranged = false;
        break;
      }
    }
  if (ranged)
    for (Eigen::Index i = 0; i < n && ranged; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        acc /= (w[i] - wp[j]);
        Real m = std::abs(acc);
        if (!(m > lo && m < hi)) {
          ranged = false;
          break;
        }
      }
  if (ranged) return acc;

  // log-domain pass
  Real logmag = 0;
  C phase = (n * (n - 1) / 2) % 2 ? C(-1) : C(1);
  auto mul = [&](C f, bool inverse) {
    Real m = std::abs(f);
    logmag += inverse ? -std::log(m) : std::log(m);
    C u = f / m;
    phase = inverse ? phase / u : phase * u;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      mul(w[i] - w[j], false);
      mul(wp[i] - wp[j], false);
    }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) mul(w[i] - wp[j], true);
  return std::exp(logmag) * phase;
}

/// Power-sum difference S_k = sum w_i^k - sum (w'_i)^k, k in {1,2,3}.
template <class Real>
std::complex<Real> s_k(const CVec<Real>& w, const CVec<Real>& wp, int k) {
  using C = std::complex<Real>;
  if (k < 1 || k > 3) throw std::invalid_argument("s_k: k must be 1, 2 or 3");
  auto powk = [k](const C& z) { return k == 1 ? z : (k == 2 ? z * z : z * z * z); };
  C s{};
  for (Eigen::Index i = 0; i < w.size(); ++i) s += powk(w[i]);
  for (Eigen::Index i = 0; i < wp.size(); ++i) s -= powk(wp[i]);
  return s;
}

/// H = (1/12) S_1^4 + (1/4) S_2^2 - (1/3) S_1 S_3.
template <class Real>
std::complex<Real> h_poly(const CVec<Real>& w, const CVec<Real>& wp) {
  using C = std::complex<Real>;
  if (w.size() == 0 || wp.size() == 0) throw std::invalid_argument("h_poly: vectors must be nonempty");
  const C s1 = s_k(w, wp, 1);
  const C s2 = s_k(w, wp, 2);
  const C s3 = s_k(w, wp, 3);
  const C s1sq = s1 * s1;
  return s1sq * s1sq / Real(12) + s2 * s2 / Real(4) - s1 * s3 / Real(3);
}

/// Exponent of f_{h,x;t}(w) = exp(-t w^3/3 + x w^2 + h w). Callers sum
/// exponents across factors and exponentiate once.
template <class Real>
std::complex<Real> log_f(Real h, Real x, Real t, const std::complex<Real>& w) {
  const std::complex<Real> w2 = w * w;
  return -t / Real(3) * w2 * w + x * w2 + h * w;
}

}  // namespace geodensity::kernels

#endif
