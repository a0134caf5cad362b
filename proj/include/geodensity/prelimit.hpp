#ifndef GEODENSITY_PRELIMIT_HPP
#define GEODENSITY_PRELIMIT_HPP

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "geodensity/quadrature.hpp"
#include "geodensity/types.hpp"

namespace geodensity::prelimit {

/// Argument of the pre-limit joint density p(beta, beta', alpha; tau) of the
/// geodesic lengths and location at time tau.
struct PrelimitPoint {
  double beta = 0;
  double beta_p = 0;
  double alpha = 0;
  double tau = 0.5;

  void validate() const {
    if (!(tau > 0 && tau < 1)) throw std::invalid_argument("PrelimitPoint: tau must lie in (0,1)");
  }
};

/// The six wedge contours C_L^in < C_L < C_L^out < 0 < C_R^out < C_R < C_R^in
/// plus the z-circle parameters. Radii of 0 are derived from the evaluation
/// point's decay via the truncation heuristic.
struct PrelimitContours {
  double a_l_in = -1.6, a_l = -1.0, a_l_out = -0.4;
  double a_r_out = 0.4, a_r = 1.0, a_r_in = 1.6;
  int nodes_per_leg = 20;
  double eps = 1e-14;
  double panel_ratio = 1.0;
  double radius_outer = 0;  // xi/eta family (carries f_{beta,alpha;tau})
  double radius_mid = 0;    // xi'/eta' family (carries f_{beta',-alpha;1-tau})
  int z_nodes = 32;
  double z_radius_in = 0.5;   // contour around 0 only
  double z_radius_out = 2.0;  // contour around both 0 and 1

  void validate() const {
    if (!(a_l_in < a_l && a_l < a_l_out && a_l_out < 0))
      throw std::invalid_argument("PrelimitContours: need a_l_in < a_l < a_l_out < 0");
    if (!(0 < a_r_out && a_r_out < a_r && a_r < a_r_in))
      throw std::invalid_argument("PrelimitContours: need 0 < a_r_out < a_r < a_r_in");
    if (nodes_per_leg < 2) throw std::invalid_argument("PrelimitContours: nodes_per_leg must be >= 2");
    if (!(z_radius_in > 0 && z_radius_in < 1))
      throw std::invalid_argument("PrelimitContours: z_radius_in must lie in (0,1)");
    if (!(z_radius_out > 1)) throw std::invalid_argument("PrelimitContours: z_radius_out must exceed 1");
  }
};

namespace detail {

constexpr int kMaxOrder = 3;

template <class Real>
struct Family {
  SampledContour<Real> contour;
  std::vector<std::complex<Real>> w, w2, w3, logf;
};

template <class Real>
Family<Real> make_family(double anchor, double theta, double radius, int nodes, double panel_ratio,
                         Real cubic, Real quad, Real lin) {
  using C = std::complex<Real>;
  Family<Real> fam;
  fam.contour = quadrature::build_wedge_at<Real>(anchor, theta, radius, nodes, panel_ratio);
  const auto m = static_cast<std::size_t>(fam.contour.size());
  fam.w.resize(m);
  fam.w2.resize(m);
  fam.w3.resize(m);
  fam.logf.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    C w = fam.contour.points[k];
    C w2 = w * w;
    fam.w[k] = w;
    fam.w2[k] = w2;
    fam.w3[k] = w2 * w;
    fam.logf[k] = -cubic / Real(3) * fam.w3[k] + quad * w2 + lin * w;
  }
  return fam;
}

// det[1/(a_i - b_j)] via the closed product form; contours keep the factors
// away from zero so no pole guard is needed here.
template <class Real>
std::complex<Real> cauchy_prod(const std::complex<Real>* a, const std::complex<Real>* b, int n) {
  using C = std::complex<Real>;
  C num(1), den(1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) num *= (a[i] - a[j]) * (b[i] - b[j]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) den *= a[i] - b[j];
  C r = num / den;
  return (n * (n - 1) / 2) % 2 ? -r : r;
}

// All 2^{2n} in/out branch integrals for one (n, n') pair. Entry `mask`
// uses C_L^in for xi_i iff bit i is set and C_R^in for eta_i iff bit n+i is
// set. first = integrand with the H factor (for T), second = without (for D).
template <class Real>
struct BranchSet {
  int n = 0, np = 0;
  std::vector<std::complex<Real>> with_h, without_h;
  bool all_finite = true;
};

template <class Real>
int nodes_for_dims(int nodes_per_leg, int dims) {
  int shift = (dims - 4) / 2;
  int m = shift > 0 ? nodes_per_leg >> shift : nodes_per_leg;
  return m < 4 ? 4 : m;
}

template <class Real>
BranchSet<Real> compute_branches(int n, int np, const PrelimitPoint& pt,
                                 const PrelimitContours& cs, Real log_shift) {
  using C = std::complex<Real>;
  if (n < 1 || np < 1 || n > kMaxOrder || np > kMaxOrder)
    throw std::invalid_argument("prelimit: series order out of supported range");
  const int dims = 2 * n + 2 * np;
  const int m = nodes_for_dims<Real>(cs.nodes_per_leg, dims);
  const double th_l = 2.0 * std::numbers::pi / 3.0;
  const double th_r = std::numbers::pi / 3.0;

  const double r_outer = cs.radius_outer > 0
                             ? cs.radius_outer
                             : quadrature::choose_truncation_radius(pt.tau, pt.beta, pt.alpha, cs.eps);
  const double r_mid = cs.radius_mid > 0
                           ? cs.radius_mid
                           : quadrature::choose_truncation_radius(1.0 - pt.tau, pt.beta_p, pt.alpha, cs.eps);

  const Real tau = static_cast<Real>(pt.tau), beta = static_cast<Real>(pt.beta),
             betap = static_cast<Real>(pt.beta_p), alpha = static_cast<Real>(pt.alpha);

  // xi/eta families carry f_{beta,alpha;tau}; xi'/eta' carry f_{beta',-alpha;1-tau}
  auto fam_l_in = make_family<Real>(cs.a_l_in, th_l, r_outer, m, cs.panel_ratio, tau, alpha, beta);
  auto fam_l_out = make_family<Real>(cs.a_l_out, th_l, r_outer, m, cs.panel_ratio, tau, alpha, beta);
  auto fam_r_in = make_family<Real>(cs.a_r_in, th_r, r_outer, m, cs.panel_ratio, tau, alpha, beta);
  auto fam_r_out = make_family<Real>(cs.a_r_out, th_r, r_outer, m, cs.panel_ratio, tau, alpha, beta);
  auto fam_l_mid = make_family<Real>(cs.a_l, th_l, r_mid, m, cs.panel_ratio, Real(1) - tau, -alpha, betap);
  auto fam_r_mid = make_family<Real>(cs.a_r, th_r, r_mid, m, cs.panel_ratio, Real(1) - tau, -alpha, betap);

  BranchSet<Real> out;
  out.n = n;
  out.np = np;
  const unsigned nb = 1u << (2 * n);
  out.with_h.resize(nb);
  out.without_h.resize(nb);

  for (unsigned mask = 0; mask < nb; ++mask) {
    std::vector<const Family<Real>*> fam(dims);
    std::vector<SampledContour<Real>> contours(dims);
    for (int i = 0; i < n; ++i) fam[i] = (mask >> i) & 1u ? &fam_l_in : &fam_l_out;
    for (int i = 0; i < n; ++i) fam[n + i] = (mask >> (n + i)) & 1u ? &fam_r_in : &fam_r_out;
    for (int i = 0; i < np; ++i) fam[2 * n + i] = &fam_l_mid;
    for (int i = 0; i < np; ++i) fam[2 * n + np + i] = &fam_r_mid;
    for (int d = 0; d < dims; ++d) contours[d] = fam[d]->contour;

    auto f = [&](std::span<const std::size_t> idx, std::span<const C>, C& out1, C& out2) {
      C ex(log_shift);
      // H(xi + eta'; eta + xi') power sums
      C sa1{}, sa2{}, sa3{}, sb1{}, sb2{}, sb3{};
      std::array<C, kMaxOrder> xi, eta, xip, etap;
      for (int i = 0; i < n; ++i) {
        const auto& F = *fam[i];
        const std::size_t k = idx[i];
        xi[i] = F.w[k];
        ex += F.logf[k];
        sa1 += F.w[k];
        sa2 += F.w2[k];
        sa3 += F.w3[k];
      }
      for (int i = 0; i < n; ++i) {
        const auto& F = *fam[n + i];
        const std::size_t k = idx[n + i];
        eta[i] = F.w[k];
        ex -= F.logf[k];
        sb1 += F.w[k];
        sb2 += F.w2[k];
        sb3 += F.w3[k];
      }
      for (int i = 0; i < np; ++i) {
        const auto& F = *fam[2 * n + i];
        const std::size_t k = idx[2 * n + i];
        xip[i] = F.w[k];
        ex += F.logf[k];
        sb1 += F.w[k];
        sb2 += F.w2[k];
        sb3 += F.w3[k];
      }
      for (int i = 0; i < np; ++i) {
        const auto& F = *fam[2 * n + np + i];
        const std::size_t k = idx[2 * n + np + i];
        etap[i] = F.w[k];
        ex -= F.logf[k];
        sa1 += F.w[k];
        sa2 += F.w2[k];
        sa3 += F.w3[k];
      }
      // C(eta'; xi') * C(xi'+eta; eta'+xi) * C(xi; eta)
      std::array<C, 2 * kMaxOrder> a2, b2;
      for (int i = 0; i < np; ++i) a2[i] = xip[i];
      for (int i = 0; i < n; ++i) a2[np + i] = eta[i];
      for (int i = 0; i < np; ++i) b2[i] = etap[i];
      for (int i = 0; i < n; ++i) b2[np + i] = xi[i];
      const C cdet = cauchy_prod(etap.data(), xip.data(), np) *
                     cauchy_prod(a2.data(), b2.data(), n + np) *
                     cauchy_prod(xi.data(), eta.data(), n);
      const C core = std::exp(ex) * cdet;
      const C s1 = sa1 - sb1, s2 = sa2 - sb2, s3 = sa3 - sb3;
      const C s1sq = s1 * s1;
      const C H = s1sq * s1sq / Real(12) + s2 * s2 / Real(4) - s1 * s3 / Real(3);
      out1 = core * H;
      out2 = core;
    };

    auto res = quadrature::integrate_tensor_pair<Real>(f, std::span<const SampledContour<Real>>(contours));
    out.with_h[mask] = res.first;
    out.without_h[mask] = res.second;
    out.all_finite = out.all_finite && res.all_finite;
  }
  return out;
}

// T_{n,n'}(z) (with_h = true, includes the overall factor 2) or D_{n,n'}(z)
// assembled from cached branch integrals.
template <class Real>
std::complex<Real> assemble_term(const BranchSet<Real>& br, std::complex<Real> z, bool with_h) {
  using C = std::complex<Real>;
  const int n = br.n, np = br.np;
  const C cin = Real(1) / (Real(1) - z);
  const C cout = -z / (Real(1) - z);
  // branch weight depends only on the number of "in" choices
  std::array<C, 2 * kMaxOrder + 1> cin_pow, cout_pow;
  cin_pow[0] = cout_pow[0] = C(1);
  for (int k = 1; k <= 2 * n; ++k) {
    cin_pow[k] = cin_pow[k - 1] * cin;
    cout_pow[k] = cout_pow[k - 1] * cout;
  }
  C sum{};
  const auto& vals = with_h ? br.with_h : br.without_h;
  for (unsigned mask = 0; mask < vals.size(); ++mask) {
    const int ins = std::popcount(mask);
    sum += cin_pow[ins] * cout_pow[2 * n - ins] * vals[mask];
  }
  C pref(1);
  for (int k = 0; k < np; ++k) pref *= Real(1) - z;
  for (int k = 0; k < n; ++k) pref *= Real(1) - Real(1) / z;
  if (with_h) pref *= Real(2);
  return pref * sum;
}

template <class Real>
Real factorial(int n) {
  Real f = 1;
  for (int k = 2; k <= n; ++k) f *= Real(k);
  return f;
}

}  // namespace detail

/// T_{n,n'}(z; beta, beta', alpha; tau): the 2^{2n} in/out contour choices
/// are expanded combinatorially, each weighted by 1/(1-z) or -z/(1-z).
template <class Real = double>
std::complex<double> eval_T_term(int n, int np, std::complex<double> z, const PrelimitPoint& pt,
                                 const PrelimitContours& cs) {
  pt.validate();
  cs.validate();
  if (z == std::complex<double>(0) || z == std::complex<double>(1))
    throw std::invalid_argument("eval_T_term: z must avoid 0 and 1");
  auto br = detail::compute_branches<Real>(n, np, pt, cs, Real(0));
  auto v = detail::assemble_term<Real>(br, std::complex<Real>(z.real(), z.imag()), true);
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

/// Pre-limit density p(beta,beta',alpha;tau): z-circle around 0 (radius < 1)
/// of the truncated double series of T_{n,n'}.
///
/// The tensor integrals are z-independent, so they are computed once per
/// (n, n', branch) and only the scalar z-weights vary across circle nodes.
/// log_shift is added to every integrand exponent; pass +4/3 L^{3/2} style
/// shifts to keep scaled evaluations in floating-point range.
template <class Real = double>
double eval_prelimit_density(const PrelimitPoint& pt, int n_max, const PrelimitContours& cs,
                             Real log_shift = 0, bool* finite = nullptr) {
  using C = std::complex<Real>;
  pt.validate();
  cs.validate();
  if (n_max < 1) throw std::invalid_argument("eval_prelimit_density: n_max must be >= 1");

  std::vector<detail::BranchSet<Real>> sets;
  bool ok = true;
  for (int n = 1; n <= n_max; ++n)
    for (int np = 1; np <= n_max; ++np) {
      sets.push_back(detail::compute_branches<Real>(n, np, pt, cs, log_shift));
      ok = ok && sets.back().all_finite;
    }

  const auto zc = quadrature::build_circle<Real>({0.0, 0.0}, cs.z_radius_in, cs.z_nodes);
  C total{};
  for (Eigen::Index k = 0; k < zc.size(); ++k) {
    const C z = zc.points[k];
    const C om = Real(1) - z;
    C s{};
    for (const auto& br : sets) {
      const Real fac = detail::factorial<Real>(br.n) * detail::factorial<Real>(br.np);
      s += detail::assemble_term<Real>(br, z, true) / (fac * fac);
    }
    total += zc.weights[k] * s / (om * om);
  }
  if (finite) *finite = ok;
  return static_cast<double>(total.real());
}

/// Two-point upper tail of the KPZ fixed point,
/// P(H(-alpha, 1-tau) >= beta', H(0,1) >= beta + beta'): z-circle of radius
/// > 1 around both poles, series of D_{n,n'} (= T without the 2 and H).
template <class Real = double>
double eval_kpz_two_point_tail(double b1, double b2, double a, double tau, int n_max,
                               const PrelimitContours& cs, bool* finite = nullptr) {
  using C = std::complex<Real>;
  PrelimitPoint pt{b1, b2, a, tau};
  pt.validate();
  cs.validate();
  if (n_max < 1) throw std::invalid_argument("eval_kpz_two_point_tail: n_max must be >= 1");

  std::vector<detail::BranchSet<Real>> sets;
  bool ok = true;
  for (int n = 1; n <= n_max; ++n)
    for (int np = 1; np <= n_max; ++np) {
      sets.push_back(detail::compute_branches<Real>(n, np, pt, cs, Real(0)));
      ok = ok && sets.back().all_finite;
    }

  const auto zc = quadrature::build_circle<Real>({0.0, 0.0}, cs.z_radius_out, cs.z_nodes);
  C total{};
  for (Eigen::Index k = 0; k < zc.size(); ++k) {
    const C z = zc.points[k];
    C s{};
    for (const auto& br : sets) {
      const Real fac = detail::factorial<Real>(br.n) * detail::factorial<Real>(br.np);
      s += detail::assemble_term<Real>(br, z, false) / (fac * fac);
    }
    total += zc.weights[k] * s / (z * (Real(1) - z));
  }
  if (finite) *finite = ok;
  return static_cast<double>(total.real());
}

/// Finite-L scaling ratio L^{-3/2} p(h L^{-1/2}, L - h L^{-1/2}, x L^{-1};
/// t L^{-3/2}) / f_GUE(L), whose large-L limit is p(h,x;t). Contours follow
/// the sqrt(L) rescaling of the convergence analysis and all exponentials
/// stay in log domain via the +4/3 L^{3/2} shift.
template <class Real = double>
double scaled_density_ratio(double h, double x, double t, double L, int n_max,
                            int nodes_per_leg = 24, double eps = 1e-14, bool* finite = nullptr) {
  if (!(L > 0)) throw std::invalid_argument("scaled_density_ratio: L must be positive");
  const double tau = t * std::pow(L, -1.5);
  if (!(tau > 0 && tau < 1))
    throw std::invalid_argument("scaled_density_ratio: need t L^{-3/2} in (0,1)");
  const double s = std::sqrt(L);
  PrelimitPoint pt{h / s, L - h / s, x / L, tau};

  PrelimitContours cs;
  cs.a_l_out = -0.5 * s;
  cs.a_l = -s;
  cs.a_l_in = -1.5 * s;
  cs.a_r_out = 0.5 * s;
  cs.a_r = s;
  cs.a_r_in = 1.5 * s;
  cs.nodes_per_leg = nodes_per_leg;
  cs.eps = eps;
  cs.panel_ratio = 0.5;
  cs.radius_outer = s * quadrature::choose_truncation_radius(t, h, x, eps);
  cs.radius_mid = 1.25 * std::sqrt(2.0 * std::log(1.0 / eps) / s) + 1.0;

  const Real shift = Real(4) / Real(3) * std::pow(static_cast<Real>(L), Real(1.5));
  const double K = eval_prelimit_density<Real>(pt, n_max, cs, shift, finite);
  return 8.0 * std::numbers::pi / s * K;
}

}  // namespace geodensity::prelimit

#endif
