#ifndef GEODENSITY_ASYMPTOTICS_HPP
#define GEODENSITY_ASYMPTOTICS_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "geodensity/gauss.hpp"
#include "geodensity/limit_density.hpp"
#include "geodensity/types.hpp"

namespace geodensity::asymptotics {

/// Leading-order GUE Tracy-Widom density: e^{-(4/3)L^{3/2}} / (8 pi L).
inline double gue_log_density_asymp(double L) {
  if (!(L > 0)) throw std::invalid_argument("gue_density_asymp: L must be positive");
  return -4.0 / 3.0 * std::pow(L, 1.5) - std::log(8.0 * std::numbers::pi * L);
}
inline double gue_density_asymp(double L) { return std::exp(gue_log_density_asymp(L)); }

/// Leading-order GUE upper tail: e^{-(4/3)L^{3/2}} / (16 pi L^{3/2}).
inline double gue_log_tail_asymp(double L) {
  if (!(L > 0)) throw std::invalid_argument("gue_tail_asymp: L must be positive");
  return -4.0 / 3.0 * std::pow(L, 1.5) - std::log(16.0 * std::numbers::pi) - 1.5 * std::log(L);
}
inline double gue_tail_asymp(double L) { return std::exp(gue_log_tail_asymp(L)); }

/// Large-time limit target phi(h) phi(x) for (t/2) p(t + h sqrt(t), x sqrt(t)/2; t).
inline double gaussian_limit_ref(double h, double x) {
  return std::exp(-0.5 * (h * h + x * x)) / (2.0 * std::numbers::pi);
}

namespace detail {

inline double tail_exponent(double h, double x, double t) {
  const double q = h + x * x / t;
  if (!(q > 0)) throw std::invalid_argument("tail_approx: need h + x^2/t > 0");
  return -4.0 / 3.0 * std::pow(q, 1.5) / std::sqrt(t) + 2.0 * h - 2.0 / 3.0 * t;
}

}  // namespace detail

/// Right-tail approximation of p as h -> infinity (x, t fixed).
inline double log_tail_approx_h(double h, double x, double t) {
  return detail::tail_exponent(h, x, t) - std::log(4.0 * std::numbers::pi * t);
}
inline double tail_approx_h(double h, double x, double t) { return std::exp(log_tail_approx_h(h, x, t)); }

/// Companion approximation of p-hat as h -> infinity.
inline double log_tail_approx_h_hat(double h, double x, double t) {
  if (!(h > 0)) throw std::invalid_argument("tail_approx_h_hat: need h > 0");
  return detail::tail_exponent(h, x, t) - std::log(4.0 * std::numbers::pi) - 0.5 * std::log(h * t);
}
inline double tail_approx_h_hat(double h, double x, double t) {
  return std::exp(log_tail_approx_h_hat(h, x, t));
}

/// Right-tail approximation of p as |x| -> infinity (h, t fixed).
inline double log_tail_approx_x(double h, double x, double t) {
  if (x == 0) throw std::invalid_argument("tail_approx_x: need x != 0");
  return detail::tail_exponent(h, x, t) - std::log(2.0 * std::numbers::pi * std::abs(x));
}
inline double tail_approx_x(double h, double x, double t) { return std::exp(log_tail_approx_x(h, x, t)); }

inline double log_tail_approx_x_hat(double h, double x, double t) {
  if (x == 0) throw std::invalid_argument("tail_approx_x_hat: need x != 0");
  return detail::tail_exponent(h, x, t) + std::log(t) - std::log(2.0 * std::numbers::pi * x * x);
}
inline double tail_approx_x_hat(double h, double x, double t) {
  return std::exp(log_tail_approx_x_hat(h, x, t));
}

/// Result of the normalization quadrature: total mass of p and p-hat over
/// the truncated rectangle, plus the outermost-strip masses as an error
/// proxy for the truncation.
struct NormalizationEstimate {
  double mass_p = 0;
  double mass_phat = 0;
  double boundary_proxy = 0;
  double h_lo = 0, h_hi = 0, x_hi = 0;
};

namespace detail {

// Rectangle mass of one series term. The (h,x) dependence of I_n is the
// pure exponential e^{S1 h + S2 x} with S1 = 2 + sum(u-v), S2 = sum(u^2-v^2),
// so the rectangle integral reduces to corner exponentials evaluated per
// node tuple; each corner exponent is folded before a single exp. This keeps
// the far left edge exact where pointwise evaluation of p drowns in
// cancellation.
template <class Real>
std::pair<std::complex<Real>, std::complex<Real>> term_mass(int n, double t,
                                                            const SeriesConfig& cfg, int nodes,
                                                            double h_lo, double h_hi,
                                                            double x_lo, double x_hi) {
  using C = std::complex<Real>;
  const double habs = std::max(std::abs(h_lo), std::abs(h_hi));
  const double xabs = std::max(std::abs(x_lo), std::abs(x_hi));
  const double radius = quadrature::choose_truncation_radius(t, habs, xabs, cfg.eps_quad);
  const auto uc =
      quadrature::build_wedge<Real>(ContourSpec::left_wedge(cfg.anchor_left, radius, nodes));
  const auto vc =
      quadrature::build_wedge<Real>(ContourSpec::right_wedge(cfg.anchor_right, radius, nodes));

  struct Tab {
    std::vector<std::complex<Real>> w, w2, w3, logf0, lin;
  };
  auto make = [&](const SampledContour<Real>& c, bool left) {
    Tab tab;
    const auto m = static_cast<std::size_t>(c.size());
    tab.w.resize(m);
    tab.w2.resize(m);
    tab.w3.resize(m);
    tab.logf0.resize(m);
    tab.lin.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      C w = c.points[k];
      C w2 = w * w;
      tab.w[k] = w;
      tab.w2[k] = w2;
      tab.w3[k] = w2 * w;
      tab.logf0[k] = -static_cast<Real>(t) / Real(3) * tab.w3[k];
      tab.lin[k] = left ? (C(1) - w) / (C(1) + w) : (C(1) + w) / (C(1) - w);
    }
    return tab;
  };
  const Tab ut = make(uc, true), vt = make(vc, false);

  std::vector<SampledContour<Real>> contours;
  for (int i = 0; i < n; ++i) contours.push_back(uc);
  for (int i = 0; i < n; ++i) contours.push_back(vc);

  const C base(static_cast<Real>(-2.0 / 3.0 * t));
  const C sign = n % 2 ? C(-1) : C(1);
  const Real rh_lo = static_cast<Real>(h_lo), rh_hi = static_cast<Real>(h_hi);
  const Real rx_lo = static_cast<Real>(x_lo), rx_hi = static_cast<Real>(x_hi);

  auto f = [&](std::span<const std::size_t> idx, std::span<const C>, C& o1, C& o2) {
    C ex0 = base;
    C su{}, su2{}, su3{}, sv{}, sv2{}, sv3{};
    C lin(1);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = idx[i];
      ex0 += ut.logf0[k];
      su += ut.w[k];
      su2 += ut.w2[k];
      su3 += ut.w3[k];
      lin *= ut.lin[k];
    }
    for (int i = 0; i < n; ++i) {
      const std::size_t k = idx[n + i];
      ex0 -= vt.logf0[k];
      sv += vt.w[k];
      sv2 += vt.w2[k];
      sv3 += vt.w3[k];
      lin *= vt.lin[k];
    }
    C vdm(1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        C du = ut.w[idx[i]] - ut.w[idx[j]];
        C dv = vt.w[idx[n + i]] - vt.w[idx[n + j]];
        vdm *= du * du * dv * dv;
      }
    C cross(1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        C d = ut.w[idx[i]] - vt.w[idx[n + j]];
        cross *= d * d;
      }
    const C s1 = Real(2) + su - sv;
    const C s2 = su2 - sv2;
    const C s3 = Real(2) + su3 - sv3;
    const C s1sq = s1 * s1;
    const C H = s1sq * s1sq / Real(12) + s2 * s2 / Real(4) - s1 * s3 / Real(3);
    const C alg = sign * lin * vdm / cross * H;

    // (e^{s1 h_hi} - e^{s1 h_lo})(e^{s2 x_hi} - e^{s2 x_lo}) / (s1 s2),
    // degenerating to midpoint * width when an exponent vanishes
    C hc[2], xc[2];
    Real hv[2], xv[2];
    int nh, nx;
    C hdiv(1), xdiv(1);
    if (std::abs(s1) * (rh_hi - rh_lo) > Real(1e-7)) {
      nh = 2;
      hc[0] = C(1);
      hv[0] = rh_hi;
      hc[1] = C(-1);
      hv[1] = rh_lo;
      hdiv = s1;
    } else {
      nh = 1;
      hc[0] = C(rh_hi - rh_lo);
      hv[0] = (rh_hi + rh_lo) / Real(2);
    }
    if (std::abs(s2) * (rx_hi - rx_lo) > Real(1e-7)) {
      nx = 2;
      xc[0] = C(1);
      xv[0] = rx_hi;
      xc[1] = C(-1);
      xv[1] = rx_lo;
      xdiv = s2;
    } else {
      nx = 1;
      xc[0] = C(rx_hi - rx_lo);
      xv[0] = (rx_hi + rx_lo) / Real(2);
    }
    C acc{};
    for (int a = 0; a < nh; ++a)
      for (int b = 0; b < nx; ++b) acc += hc[a] * xc[b] * std::exp(ex0 + s1 * hv[a] + s2 * xv[b]);
    o1 = alg * acc / (hdiv * xdiv);
    o2 = o1 * Real(2) / (sv - su);
  };

  auto r = quadrature::integrate_tensor_pair<Real>(f, std::span<const SampledContour<Real>>(contours));
  return {r.first, r.second};
}

template <class Real>
std::pair<double, double> rect_mass(double t, const SeriesConfig& cfg, double h_lo, double h_hi,
                                    double x_lo, double x_hi) {
  using C = std::complex<Real>;
  C mp{}, mph{};
  for (int n = 1; n <= cfg.n_max; ++n) {
    const Real fac = limit_density::detail::factorial_sq<Real>(n);
    auto [a, b] = term_mass<Real>(n, t, cfg, cfg.nodes_for_term(n), h_lo, h_hi, x_lo, x_hi);
    mp += a / fac;
    mph += b / fac;
  }
  return {static_cast<double>(mp.real()), static_cast<double>(mph.real())};
}

}  // namespace detail

/// Tensor quadrature of the series masses of p and p-hat over [h_lo, h_hi] x
/// [-x_hi, x_hi]. The right and x limits come from the tail approximations;
/// the left limit is extended until the boundary strip contributes < 1e-3
/// (the paper gives no h -> -infinity asymptotic). The rectangle integral of
/// each term is carried out exactly against the explicit e^{S1 h + S2 x}
/// dependence of the integrand, which stays stable far into the left tail.
template <class Real = double>
NormalizationEstimate normalization_estimate(double t, const SeriesConfig& cfg) {
  if (!(t > 0)) throw std::invalid_argument("normalization_estimate: t must be positive");
  cfg.validate();

  double h_hi = 2.0;
  while (h_hi < 40.0 && tail_approx_h(h_hi, 0.0, t) > 1e-6) h_hi += 0.5;
  // max over h of the tail exponent at fixed x is -2 x^2 / t, so mass beyond
  // x_hi is negligible once 2 x_hi^2 / t > log(1e6)
  double x_hi = std::sqrt(0.5 * t * std::log(1e6)) + 0.75;
  while (x_hi < 40.0 && tail_approx_x(0.0, x_hi, t) > 1e-6) x_hi += 0.5;

  NormalizationEstimate est;
  est.h_hi = h_hi;
  est.x_hi = x_hi;

  double h_lo = -2.0;
  auto [mp, mph] = detail::rect_mass<Real>(t, cfg, h_lo, h_hi, -x_hi, x_hi);
  double strip_p = 1, strip_ph = 1;
  while (h_lo > -8.0) {
    auto [mp2, mph2] = detail::rect_mass<Real>(t, cfg, h_lo - 1.0, h_hi, -x_hi, x_hi);
    strip_p = mp2 - mp;
    strip_ph = mph2 - mph;
    mp = mp2;
    mph = mph2;
    h_lo -= 1.0;
    if (std::max(std::abs(strip_p), std::abs(strip_ph)) < 1e-3) break;
  }
  est.mass_p = mp;
  est.mass_phat = mph;
  est.h_lo = h_lo;

  auto [mp_r, mph_r] = detail::rect_mass<Real>(t, cfg, h_lo, h_hi + 1.0, -x_hi, x_hi);
  auto [mp_x, mph_x] = detail::rect_mass<Real>(t, cfg, h_lo, h_hi, -x_hi - 0.5, x_hi + 0.5);
  est.boundary_proxy = std::abs(strip_p) + std::abs(strip_ph) + std::abs(mp_r - mp) +
                       std::abs(mph_r - mph) + std::abs(mp_x - mp) + std::abs(mph_x - mph);
  return est;
}

}  // namespace geodensity::asymptotics

#endif
