#ifndef GEODENSITY_QUADRATURE_HPP
#define GEODENSITY_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "geodensity/gauss.hpp"
#include "geodensity/parallel.hpp"
#include "geodensity/types.hpp"

namespace geodensity::quadrature {

/// Wedge truncation length such that the cubic decay of
/// exp(-t w^3/3 + x w^2 + h w) reaches eps at the leg ends, with a 1.25x
/// safety factor on top. Monotone: nonincreasing in t, nondecreasing in
/// |h|, |x| and log(1/eps).
inline double choose_truncation_radius(double t, double h, double x, double eps) {
  if (!(t > 0)) throw std::invalid_argument("choose_truncation_radius: t must be positive");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("choose_truncation_radius: eps must be in (0,1)");
  const double lg = std::log(1.0 / eps);
  double r = std::max(1.0, std::cbrt(3.0 * lg / t));
  for (int it = 0; it < 32; ++it)
    r = std::cbrt(3.0 * (lg + std::abs(x) * r * r + std::abs(h) * r) / t);
  return 1.25 * r;
}

namespace detail {

// Composite Gauss-Legendre nodes on (0, radius], panels refined toward 0
// with ratio `panel_ratio` (1 = uniform). Returns (r_k, w_k) with
// sum w_k f(r_k) ~ integral_0^radius f.
template <class Real>
std::pair<std::vector<Real>, std::vector<Real>> leg_rule(double radius, int nodes,
                                                         double panel_ratio) {
  int panels = std::clamp(nodes / 8, 1, 5);
  std::vector<double> edges(panels + 1);
  edges[0] = 0.0;
  if (panel_ratio >= 1.0) {
    for (int j = 1; j <= panels; ++j) edges[j] = radius * j / panels;
  } else {
    for (int j = 1; j <= panels; ++j)
      edges[j] = radius * std::pow(panel_ratio, static_cast<double>(panels - j));
  }
  // distribute nodes, extra ones to the innermost panels
  std::vector<int> counts(panels, nodes / panels);
  for (int j = 0; j < nodes % panels; ++j) counts[j]++;

  std::vector<Real> r, w;
  r.reserve(nodes);
  w.reserve(nodes);
  for (int j = 0; j < panels; ++j) {
    auto [x01, w01] = gauss_legendre_nodes<Real>(counts[j]);
    const Real a = static_cast<Real>(edges[j]);
    const Real b = static_cast<Real>(edges[j + 1]);
    for (int k = 0; k < counts[j]; ++k) {
      r.push_back(a + (b - a) * x01[k]);
      w.push_back((b - a) * w01[k]);
    }
  }
  return {std::move(r), std::move(w)};
}

}  // namespace detail

/// Wedge discretizer without the (-1,0)/(0,1) anchor restriction; used for
/// the pre-limit contour families whose anchors scale with the conditioning.
template <class Real>
SampledContour<Real> build_wedge_at(double anchor, double theta, double radius, int nodes_per_leg,
                                    double panel_ratio = 0.5) {
  using C = std::complex<Real>;
  auto [r, w] = detail::leg_rule<Real>(radius, nodes_per_leg, panel_ratio);
  const int m = static_cast<int>(r.size());
  const C dir_lo = std::polar(Real(1), static_cast<Real>(-theta));
  const C dir_hi = std::polar(Real(1), static_cast<Real>(theta));
  const C inv_2pii = C(0, -1) / (Real(2) * std::numbers::pi_v<Real>);
  const Real a = static_cast<Real>(anchor);

  SampledContour<Real> out;
  out.points.resize(2 * m);
  out.weights.resize(2 * m);
  // lower leg, far end -> anchor (traversed against increasing r)
  for (int k = 0; k < m; ++k) {
    out.points[k] = a + r[m - 1 - k] * dir_lo;
    out.weights[k] = -w[m - 1 - k] * dir_lo * inv_2pii;
  }
  // upper leg, anchor -> far end
  for (int k = 0; k < m; ++k) {
    out.points[m + k] = a + r[k] * dir_hi;
    out.weights[m + k] = w[k] * dir_hi * inv_2pii;
  }
  return out;
}

/// Discretizes a wedge contour: two legs anchor + r e^{+-i theta},
/// r in (0, radius], theta = 2*pi/3 (left) or pi/3 (right). Orientation runs
/// from the e^{-i theta} leg through the anchor to the e^{+i theta} leg;
/// weights carry the leg direction and 1/(2*pi*i).
template <class Real>
SampledContour<Real> build_wedge(const ContourSpec& spec) {
  if (spec.kind == ContourKind::Circle)
    throw std::invalid_argument("build_wedge: spec must be a wedge");
  const bool left = spec.kind == ContourKind::LeftWedge;
  if (left && !(spec.anchor > -1 && spec.anchor < 0))
    throw std::invalid_argument("build_wedge: left-wedge anchor must lie in (-1,0)");
  if (!left && !(spec.anchor > 0 && spec.anchor < 1))
    throw std::invalid_argument("build_wedge: right-wedge anchor must lie in (0,1)");
  if (!(spec.radius > 0)) throw std::invalid_argument("build_wedge: radius must be positive");
  if (spec.nodes_per_leg < 2) throw std::invalid_argument("build_wedge: nodes_per_leg must be >= 2");
  return build_wedge_at<Real>(spec.anchor, left ? 2.0 * std::numbers::pi / 3.0 : std::numbers::pi / 3.0,
                              spec.radius, spec.nodes_per_leg, spec.panel_ratio);
}

/// m equispaced trapezoid nodes on a counterclockwise circle; exact weights
/// (z_k - center)/m with 1/(2*pi*i) absorbed.
template <class Real>
SampledContour<Real> build_circle(std::complex<double> center, double radius, int m) {
  if (!(radius > 0)) throw std::invalid_argument("build_circle: radius must be positive");
  if (m < 4) throw std::invalid_argument("build_circle: need at least 4 nodes");
  using C = std::complex<Real>;
  SampledContour<Real> out;
  out.points.resize(m);
  out.weights.resize(m);
  const C c(static_cast<Real>(center.real()), static_cast<Real>(center.imag()));
  for (int k = 0; k < m; ++k) {
    Real th = Real(2) * std::numbers::pi_v<Real> * Real(k) / Real(m);
    C offset = static_cast<Real>(radius) * C(std::cos(th), std::sin(th));
    out.points[k] = c + offset;
    out.weights[k] = offset / Real(m);
  }
  return out;
}

template <class Real>
struct TensorResult {
  std::complex<Real> first{};
  std::complex<Real> second{};
  bool all_finite = true;
};

namespace detail {

constexpr std::uint64_t kChunk = 1024;

template <class Real>
bool finite(const std::complex<Real>& z) {
  return std::isfinite(static_cast<double>(z.real())) && std::isfinite(static_cast<double>(z.imag()));
}

}  // namespace detail

/// Tensor-product quadrature over a product of sampled contours.
///
/// F is called as f(idx, nodes, out1, out2) where idx[d] selects the node of
/// contour d; it must add nothing, only assign the integrand values.
/// Evaluation is data-parallel over node tuples, but partial sums are formed
/// per fixed 1024-tuple chunk and reduced in chunk order, so the result is
/// bit-identical for any worker count.
template <class Real, class F>
TensorResult<Real> integrate_tensor_pair(F&& f, std::span<const SampledContour<Real>> contours) {
  using C = std::complex<Real>;
  if (contours.empty()) throw std::invalid_argument("integrate_tensor: contour list is empty");
  const std::size_t k = contours.size();
  std::uint64_t total = 1;
  for (const auto& c : contours) {
    if (c.size() == 0) throw std::invalid_argument("integrate_tensor: empty contour");
    total *= static_cast<std::uint64_t>(c.size());
  }
  const std::uint64_t nchunks = (total + detail::kChunk - 1) / detail::kChunk;
  std::vector<C> part1(nchunks), part2(nchunks);
  std::vector<std::uint8_t> bad(nchunks, 0);

  auto run_chunk = [&](std::size_t chunk) {
    const std::uint64_t begin = chunk * detail::kChunk;
    const std::uint64_t end = std::min(begin + detail::kChunk, total);
    std::vector<std::size_t> idx(k);
    std::vector<C> nodes(k);
    std::vector<C> wpref(k);  // prefix products of weights
    // decode row-major flat index (last dimension fastest)
    std::uint64_t rem = begin;
    for (std::size_t d = k; d-- > 0;) {
      const std::uint64_t n = contours[d].size();
      idx[d] = static_cast<std::size_t>(rem % n);
      rem /= n;
    }
    auto refresh = [&](std::size_t from) {
      for (std::size_t d = from; d < k; ++d) {
        C w = contours[d].weights[idx[d]];
        wpref[d] = d == 0 ? w : wpref[d - 1] * w;
        nodes[d] = contours[d].points[idx[d]];
      }
    };
    refresh(0);
    C acc1{}, acc2{};
    bool ok = true;
    for (std::uint64_t flat = begin; flat < end; ++flat) {
      C v1, v2;
      f(std::span<const std::size_t>(idx), std::span<const C>(nodes), v1, v2);
      ok = ok && detail::finite(v1) && detail::finite(v2);
      acc1 += v1 * wpref[k - 1];
      acc2 += v2 * wpref[k - 1];
      // odometer increment
      std::size_t d = k;
      while (d-- > 0) {
        if (++idx[d] < static_cast<std::size_t>(contours[d].size())) {
          refresh(d);
          break;
        }
        idx[d] = 0;
      }
    }
    part1[chunk] = acc1;
    part2[chunk] = acc2;
    bad[chunk] = ok ? 0 : 1;
  };

  ThreadPool::instance().run(static_cast<std::size_t>(nchunks), run_chunk);

  TensorResult<Real> res;
  for (std::uint64_t c = 0; c < nchunks; ++c) {
    res.first += part1[c];
    res.second += part2[c];
    if (bad[c]) res.all_finite = false;
  }
  return res;
}

/// Single-integrand convenience wrapper: f(nodes) -> complex.
template <class Real, class F>
TensorResult<Real> integrate_tensor(F&& f, std::span<const SampledContour<Real>> contours) {
  using C = std::complex<Real>;
  return integrate_tensor_pair<Real>(
      [&f](std::span<const std::size_t>, std::span<const C> nodes, C& v1, C& v2) {
        v1 = f(nodes);
        v2 = C{};
      },
      contours);
}

template <class Real, class F>
TensorResult<Real> integrate_tensor(F&& f, const std::vector<SampledContour<Real>>& contours) {
  return integrate_tensor<Real>(std::forward<F>(f), std::span<const SampledContour<Real>>(contours));
}

}  // namespace geodensity::quadrature

#endif
