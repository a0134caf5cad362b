#ifndef GEODENSITY_LIMIT_DENSITY_HPP
#define GEODENSITY_LIMIT_DENSITY_HPP

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "geodensity/kernels.hpp"
#include "geodensity/quadrature.hpp"
#include "geodensity/types.hpp"

namespace geodensity::limit_density {

/// Integrand I_n of the series for p(h,x;t):
///   (-1)^n e^{-2t/3+2h} * prod_{i<j}(u_i-u_j)^2(v_i-v_j)^2 / prod(u_i-v_j)^2
///   * prod_i (1+v_i)(1-u_i)f(u_i) / ((1+u_i)(1-v_i)f(v_i))
///   * H(U+(1); V+(-1)),
/// with every f-ratio assembled in one exponent before exponentiating.
template <class Real>
std::complex<Real> integrand_I(int n, const CVec<Real>& U, const CVec<Real>& V,
                               const DensityPoint& pt) {
  using C = std::complex<Real>;
  if (n < 1 || U.size() != n || V.size() != n)
    throw std::invalid_argument("integrand_I: need |U| = |V| = n >= 1");
  const C one(1), minus_one(-1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (kernels::detail::near_coincident<Real>(U[i], minus_one))
      throw kernels::SingularityError("integrand_I: u_i at the pole -1");
    if (kernels::detail::near_coincident<Real>(V[i], one))
      throw kernels::SingularityError("integrand_I: v_i at the pole 1");
    for (Eigen::Index j = 0; j < n; ++j)
      if (kernels::detail::near_coincident<Real>(U[i], V[j]))
        throw kernels::SingularityError("integrand_I: u_i = v_j");
  }
  const Real h = static_cast<Real>(pt.h), x = static_cast<Real>(pt.x), t = static_cast<Real>(pt.t);

  C expo = -Real(2) / Real(3) * t + Real(2) * h;
  for (Eigen::Index i = 0; i < n; ++i)
    expo += kernels::log_f(h, x, t, U[i]) - kernels::log_f(h, x, t, V[i]);

  C ratio = std::exp(expo);
  for (Eigen::Index i = 0; i < n; ++i)
    ratio *= (one + V[i]) * (one - U[i]) / ((one + U[i]) * (one - V[i]));

  C vdm(1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      C du = U[i] - U[j], dv = V[i] - V[j];
      vdm *= du * du * dv * dv;
    }
  C cross(1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      C d = U[i] - V[j];
      cross *= d * d;
    }

  CVec<Real> plus1(1), minus1(1);
  plus1[0] = one;
  minus1[0] = minus_one;
  const C H = kernels::h_poly(kernels::vec_concat(U, plus1), kernels::vec_concat(V, minus1));

  const C sign = n % 2 ? C(-1) : C(1);
  return sign * ratio * vdm / cross * H;
}

/// I-hat_n = 2 / sum(v_i - u_i) * I_n. On admissible contours the
/// denominator has real part >= anchor_right - anchor_left > 0.
template <class Real>
std::complex<Real> integrand_I_hat(int n, const CVec<Real>& U, const CVec<Real>& V,
                                   const DensityPoint& pt) {
  using C = std::complex<Real>;
  C denom{};
  for (Eigen::Index i = 0; i < n; ++i) denom += V[i] - U[i];
  if (std::abs(denom) < Real(1e-13) * Real(n))
    throw kernels::SingularityError("integrand_I_hat: vanishing denominator sum(v_i - u_i)");
  return Real(2) / denom * integrand_I(n, U, V, pt);
}

namespace detail {

template <class Real>
struct NodeTable {
  // per-node caches for the fused integrand
  std::vector<std::complex<Real>> w, w2, w3, logf, lin;
};

template <class Real>
NodeTable<Real> make_table(const SampledContour<Real>& c, Real h, Real x, Real t, bool left) {
  using C = std::complex<Real>;
  NodeTable<Real> tab;
  const auto m = static_cast<std::size_t>(c.size());
  tab.w.resize(m);
  tab.w2.resize(m);
  tab.w3.resize(m);
  tab.logf.resize(m);
  tab.lin.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    C w = c.points[k];
    C w2 = w * w;
    tab.w[k] = w;
    tab.w2[k] = w2;
    tab.w3[k] = w2 * w;
    tab.logf[k] = -t / Real(3) * tab.w3[k] + x * w2 + h * w;
    tab.lin[k] = left ? (C(1) - w) / (C(1) + w) : (C(1) + w) / (C(1) - w);
  }
  return tab;
}

enum class Mode { Density, UpperTail };

// One series term: the 2n-fold tensor integral (without the 1/(n!)^2).
// Density mode returns (integral of I_n, integral of I-hat_n);
// UpperTail mode returns (integral of I_n with the H factor dropped, 0).
template <class Real>
quadrature::TensorResult<Real> term_integral(int n, const DensityPoint& pt, const SeriesConfig& cfg,
                                             int nodes_per_leg, Mode mode, Real log_shift = 0) {
  using C = std::complex<Real>;
  const Real h = static_cast<Real>(pt.h), x = static_cast<Real>(pt.x), t = static_cast<Real>(pt.t);
  const double radius = cfg.radius_override
                            ? *cfg.radius_override
                            : quadrature::choose_truncation_radius(pt.t, pt.h, pt.x, cfg.eps_quad);
  const auto uc = quadrature::build_wedge<Real>(
      ContourSpec::left_wedge(cfg.anchor_left, radius, nodes_per_leg));
  const auto vc = quadrature::build_wedge<Real>(
      ContourSpec::right_wedge(cfg.anchor_right, radius, nodes_per_leg));
  const auto ut = make_table(uc, h, x, t, true);
  const auto vt = make_table(vc, h, x, t, false);

  std::vector<SampledContour<Real>> contours;
  contours.reserve(2 * n);
  for (int i = 0; i < n; ++i) contours.push_back(uc);
  for (int i = 0; i < n; ++i) contours.push_back(vc);

  const C base = C(-Real(2) / Real(3) * t + Real(2) * h + log_shift);
  const C sign = n % 2 ? C(-1) : C(1);
  const int nn = n;

  auto f = [&, nn](std::span<const std::size_t> idx, std::span<const C>, C& out1, C& out2) {
    C expo = base;
    C su{}, su2{}, su3{}, sv{}, sv2{}, sv3{};
    C lin(1);
    for (int i = 0; i < nn; ++i) {
      const std::size_t k = idx[i];
      expo += ut.logf[k];
      su += ut.w[k];
      su2 += ut.w2[k];
      su3 += ut.w3[k];
      lin *= ut.lin[k];
    }
    for (int i = 0; i < nn; ++i) {
      const std::size_t k = idx[nn + i];
      expo -= vt.logf[k];
      sv += vt.w[k];
      sv2 += vt.w2[k];
      sv3 += vt.w3[k];
      lin *= vt.lin[k];
    }
    C vdm(1);
    for (int i = 0; i < nn; ++i)
      for (int j = i + 1; j < nn; ++j) {
        C du = ut.w[idx[i]] - ut.w[idx[j]];
        C dv = vt.w[idx[nn + i]] - vt.w[idx[nn + j]];
        vdm *= du * du * dv * dv;
      }
    C cross(1);
    for (int i = 0; i < nn; ++i)
      for (int j = 0; j < nn; ++j) {
        C d = ut.w[idx[i]] - vt.w[idx[nn + j]];
        cross *= d * d;
      }
    const C core = sign * std::exp(expo) * lin * vdm / cross;
    if (mode == Mode::Density) {
      const C s1 = Real(2) + su - sv;
      const C s2 = su2 - sv2;
      const C s3 = Real(2) + su3 - sv3;
      const C s1sq = s1 * s1;
      const C H = s1sq * s1sq / Real(12) + s2 * s2 / Real(4) - s1 * s3 / Real(3);
      out1 = core * H;
      out2 = out1 * Real(2) / (sv - su);  // I-hat
    } else {
      out1 = core;
      out2 = C{};
    }
  };

  return quadrature::integrate_tensor_pair<Real>(f, std::span<const SampledContour<Real>>(contours));
}

template <class Real>
Real factorial_sq(int n) {
  Real f = 1;
  for (int k = 2; k <= n; ++k) f *= Real(k);
  return f * f;
}

template <class Real>
std::pair<EvalResult, EvalResult> eval_series(const DensityPoint& pt, const SeriesConfig& cfg,
                                              Mode mode) {
  using C = std::complex<Real>;
  cfg.validate();
  if (!(pt.t > 0)) throw std::invalid_argument("eval: t must be positive");

  EvalResult rp, rph;
  rp.n_used = rph.n_used = cfg.n_max;
  C totp{}, totph{};
  double refine_p = 0, refine_ph = 0;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const int m = cfg.nodes_for_term(n);
    const int mc = std::max(4, m / 2);
    const Real fac = factorial_sq<Real>(n);
    auto fine = term_integral<Real>(n, pt, cfg, m, mode);
    auto coarse = term_integral<Real>(n, pt, cfg, mc, mode);
    C tp = fine.first / fac, tph = fine.second / fac;
    totp += tp;
    totph += tph;
    refine_p += static_cast<double>(std::abs(tp - coarse.first / fac));
    refine_ph += static_cast<double>(std::abs(tph - coarse.second / fac));
    rp.terms.emplace_back(static_cast<double>(tp.real()), static_cast<double>(tp.imag()));
    rph.terms.emplace_back(static_cast<double>(tph.real()), static_cast<double>(tph.imag()));
    rp.finite = rp.finite && fine.all_finite && coarse.all_finite;
    rph.finite = rp.finite;
  }
  const double sign = mode == Mode::UpperTail ? -1.0 : 1.0;
  rp.value = sign * static_cast<double>(totp.real());
  rph.value = sign * static_cast<double>(totph.real());
  if (mode == Mode::UpperTail)
    for (auto& z : rp.terms) z = -z;
  rp.err_estimate = refine_p + std::abs(rp.terms.back());
  rph.err_estimate = refine_ph + std::abs(rph.terms.back());
  return {std::move(rp), std::move(rph)};
}

}  // namespace detail

/// p(h,x;t) = sum_n 1/(n!)^2 * integral of I_n over Gamma_L^n x Gamma_R^n,
/// truncated at cfg.n_max. err_estimate = node-refinement delta + |last term|.
template <class Real = double>
EvalResult eval_p(const DensityPoint& pt, const SeriesConfig& cfg) {
  return detail::eval_series<Real>(pt, cfg, detail::Mode::Density).first;
}

/// p-hat(h,x;t): same series with I-hat_n.
template <class Real = double>
EvalResult eval_p_hat(const DensityPoint& pt, const SeriesConfig& cfg) {
  return detail::eval_series<Real>(pt, cfg, detail::Mode::Density).second;
}

/// Both densities from one tensor sweep (they share every integrand factor).
template <class Real = double>
std::pair<EvalResult, EvalResult> eval_p_pair(const DensityPoint& pt, const SeriesConfig& cfg) {
  return detail::eval_series<Real>(pt, cfg, detail::Mode::Density);
}

/// One-point upper-tail-field probability P(H_UT(x,-t) >= -h): the p series
/// with the H factor removed from I_n and the overall sign flipped.
template <class Real = double>
EvalResult eval_ut_tail(const DensityPoint& pt, const SeriesConfig& cfg) {
  return detail::eval_series<Real>(pt, cfg, detail::Mode::UpperTail).first;
}

/// Leading series term (n = 1) on steepest-descent contours anchored at the
/// saddle points w = x/t -+ sqrt(h + x^2/t) / sqrt(t) of f_{h,x;t}, scaled by
/// e^{log_scale}. Valid because I_1 and I-hat_1 are analytic at u = -1 and
/// v = 1, so the wedges may leave the (-1,0) and (0,1) windows. This is the
/// only way to evaluate the far tail, where the admissible contours lose all
/// significance to cancellation. Returns {e^{log_scale} term1_p,
/// e^{log_scale} term1_phat}.
template <class Real = double>
std::pair<double, double> eval_leading_term_scaled(const DensityPoint& pt, double log_scale,
                                                   int nodes_per_leg = 96, double eps_quad = 1e-16) {
  using C = std::complex<Real>;
  const double q = pt.h + pt.x * pt.x / pt.t;
  if (!(pt.t > 0) || !(q > 0))
    throw std::invalid_argument("eval_leading_term_scaled: need t > 0 and h + x^2/t > 0");
  const double wm = pt.x / pt.t - std::sqrt(q / pt.t);
  const double wp = pt.x / pt.t + std::sqrt(q / pt.t);
  const double radius =
      quadrature::choose_truncation_radius(pt.t, std::abs(pt.h) + 1.0, std::abs(pt.x) + 1.0, eps_quad);
  const auto uc = quadrature::build_wedge_at<Real>(wm, 2.0 * std::numbers::pi / 3.0, radius,
                                                   nodes_per_leg, 0.5);
  const auto vc =
      quadrature::build_wedge_at<Real>(wp, std::numbers::pi / 3.0, radius, nodes_per_leg, 0.5);
  const Real h = static_cast<Real>(pt.h), x = static_cast<Real>(pt.x), t = static_cast<Real>(pt.t);
  const C base(static_cast<Real>(-2.0 / 3.0 * pt.t + 2.0 * pt.h + log_scale));
  auto f = [&](std::span<const std::size_t>, std::span<const C> w, C& o1, C& o2) {
    const C u = w[0], v = w[1];
    const C ex = base + kernels::log_f(h, x, t, u) - kernels::log_f(h, x, t, v);
    o1 = Real(-2) * std::exp(ex) * (Real(1) + v) * (Real(1) - u) / (u - v);
    o2 = o1 * Real(2) / (v - u);
  };
  const std::vector<SampledContour<Real>> contours{uc, vc};
  auto r = quadrature::integrate_tensor_pair<Real>(f, std::span<const SampledContour<Real>>(contours));
  return {static_cast<double>(r.first.real()), static_cast<double>(r.second.real())};
}

/// Central finite-difference application of D = (1/12) d^4/dh^4
/// + (1/4) d^2/dx^2 + d^2/(dh dt) to a scalar field of (h, x, t).
template <class F>
double apply_D_fd(F&& func, const DensityPoint& pt, double step) {
  if (!(step > 0)) throw std::invalid_argument("apply_D_fd: step must be positive");
  if (!(pt.t - 2 * step > 0)) throw std::invalid_argument("apply_D_fd: need t - 2*step > 0");
  const double h = pt.h, x = pt.x, t = pt.t, s = step;
  const double c0 = func(h, x, t);
  const double d4h = (func(h - 2 * s, x, t) - 4 * func(h - s, x, t) + 6 * c0 -
                      4 * func(h + s, x, t) + func(h + 2 * s, x, t)) /
                     (s * s * s * s);
  const double d2x = (func(h, x - s, t) - 2 * c0 + func(h, x + s, t)) / (s * s);
  const double dhdt = (func(h + s, x, t + s) - func(h + s, x, t - s) - func(h - s, x, t + s) +
                       func(h - s, x, t - s)) /
                      (4 * s * s);
  return d4h / 12 + d2x / 4 + dhdt;
}

}  // namespace geodensity::limit_density

#endif
