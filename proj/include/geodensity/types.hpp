#ifndef GEODENSITY_TYPES_HPP
#define GEODENSITY_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace geodensity {

template <class Real>
using CVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

enum class ContourKind { LeftWedge, RightWedge, Circle };

/// Parameterized integration contour: two rays from a real anchor (wedge),
/// or a circle. Wedge angles are fixed by the contour family: 2*pi/3 for the
/// left wedge, pi/3 for the right wedge.
struct ContourSpec {
  ContourKind kind = ContourKind::LeftWedge;
  double anchor = -0.5;           // real anchor for wedges
  std::complex<double> center{};  // circle center
  double radius = 6.0;            // wedge truncation length or circle radius
  int nodes_per_leg = 32;
  double panel_ratio = 0.5;  // geometric panel refinement toward the anchor; 1 = uniform

  static ContourSpec left_wedge(double anchor, double radius, int nodes) {
    return {ContourKind::LeftWedge, anchor, {}, radius, nodes, 0.5};
  }
  static ContourSpec right_wedge(double anchor, double radius, int nodes) {
    return {ContourKind::RightWedge, anchor, {}, radius, nodes, 0.5};
  }
};

/// Discretized contour. weights absorb the local parameterization derivative
/// and the 1/(2*pi*i) factor, so an integral is just sum f(points)*weights.
template <class Real>
struct SampledContour {
  CVec<Real> points;
  CVec<Real> weights;

  Eigen::Index size() const { return points.size(); }

  SampledContour reversed() const {
    SampledContour r;
    r.points = points.reverse();
    r.weights = -weights.reverse();
    return r;
  }
};

/// Evaluation point (h, x, t) of the limiting joint densities.
struct DensityPoint {
  double h = 0;
  double x = 0;
  double t = 1;
};

/// Truncation and quadrature controls for the series evaluators.
///
/// Term n of the series uses nodes_per_leg / 2^(n-1) nodes per wedge leg
/// (floor 6), so the default cost stays bounded as n_max grows.
struct SeriesConfig {
  int n_max = 3;
  int nodes_per_leg = 48;
  double eps_quad = 1e-16;                      // contour truncation target
  double anchor_left = -0.5;                    // in (-1, 0)
  double anchor_right = 0.5;                    // in (0, 1)
  std::optional<double> radius_override = {};   // fixed wedge radius if set

  void validate() const {
    if (n_max < 1) throw std::invalid_argument("SeriesConfig: n_max must be >= 1");
    if (nodes_per_leg < 2) throw std::invalid_argument("SeriesConfig: nodes_per_leg must be >= 2");
    if (!(eps_quad > 0 && eps_quad < 1)) throw std::invalid_argument("SeriesConfig: eps_quad must be in (0,1)");
    if (!(anchor_left > -1 && anchor_left < 0))
      throw std::invalid_argument("SeriesConfig: anchor_left must lie in (-1,0)");
    if (!(anchor_right > 0 && anchor_right < 1))
      throw std::invalid_argument("SeriesConfig: anchor_right must lie in (0,1)");
    if (radius_override && !(*radius_override > 0))
      throw std::invalid_argument("SeriesConfig: radius_override must be positive");
  }

  int nodes_for_term(int n) const {
    int m = nodes_per_leg >> (n - 1);
    return m < 6 ? 6 : m;
  }
};

/// Series evaluation result. terms carry the 1/(n!)^2 factors; imaginary
/// parts are diagnostics (the densities are real).
struct EvalResult {
  double value = 0;
  std::vector<std::complex<double>> terms;
  double err_estimate = 0;
  int n_used = 0;
  bool finite = true;
};

}  // namespace geodensity

#endif
