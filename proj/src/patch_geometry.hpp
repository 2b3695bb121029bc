#pragma once

#include <array>
#include <vector>

#include "common.hpp"
#include "spline_basis.hpp"

namespace dislocgeo {

/// Single NURBS patch describing the reference configuration.
struct Patch {
  TensorBasis3D basis;
  std::vector<Vec3> control_points;  // one per basis function, indexed like the basis
  Vec3 box_lo{};                     // bounding box of the control net
  Vec3 box_hi{};

  Patch() = default;
  Patch(TensorBasis3D b, std::vector<Vec3> cps);

  void validate() const;
  Vec3 extents() const { return {box_hi[0] - box_lo[0], box_hi[1] - box_lo[1], box_hi[2] - box_lo[2]}; }
};

/// Box [-L/2, L/2]^3 (per-axis L) centred at the origin. Control points sit at
/// the Greville abscissae so that x(t) = L * (t - 1/2) exactly for unit weights.
Patch make_box_patch(const TensorBasis3D& basis, const Vec3& extents);

/// Throws UnsupportedGeometry unless each of the six boundary faces of the
/// control net lies in a plane x_d = const for its own direction d.
void require_axis_aligned_faces(const Patch& patch);

/// Greville abscissae of a knot vector.
std::vector<double> greville_points(const KnotVector& kv);

Vec3 geometry_map(const Patch& patch, const Vec3& t);

struct JacobianEval {
  Mat3 J{};    // J[i][k] = dx^i / dt^k
  double det = 0.0;
  Mat3 inv{};  // inv[k][i] = dt^k / dx^i
};

/// Throws SingularGeometry if det J <= 0.
JacobianEval jacobian(const Patch& patch, const Vec3& t);

/// Parameter point mapping to the physical point x (Newton iteration). Throws
/// Domain when x lies outside the patch.
Vec3 inverse_map(const Patch& patch, const Vec3& x);

struct GaussRule {
  std::vector<double> points;   // on [-1, 1], ascending
  std::vector<double> weights;
};

/// Gauss-Legendre rule with q points, 1 <= q <= 10.
GaussRule gauss_rule(int q);

struct QuadPoint {
  Vec3 t{};
  double weight = 0.0;  // gauss weight * span scaling * det J
};

/// Full tensor quadrature of the patch. Spans are visited in lexicographic
/// (i1, i2, i3) order with i1 slowest and points lexicographic inside a span.
std::vector<QuadPoint> assemble_quadrature(const Patch& patch, int q);

/// One quadrature point with basis data mapped to physical space.
struct SweepPoint {
  Vec3 t{};
  Vec3 x{};
  double weight = 0.0;          // includes det J
  double det_j = 0.0;
  std::vector<double> N;        // values of the active functions
  std::vector<Vec3> grad;       // dN/dx of the active functions
};

struct SweepSpan {
  std::array<int, 3> span{};    // knot span index per direction
  std::vector<int> indices;     // active global basis indices, same order as N
  std::vector<SweepPoint> points;
};

/// Visits the quadrature spans of a patch in the documented order, handing the
/// callback fully evaluated basis data. Buffers are reused between spans.
class QuadratureSweep {
 public:
  QuadratureSweep(const Patch& patch, int q);

  int points_per_direction() const { return q_; }
  std::size_t num_spans() const;

  template <class F>
  void for_each_span(F&& f) const {
    SweepSpan data;
    for (std::size_t s1 = 0; s1 < dirs_[0].spans.size(); ++s1)
      for (std::size_t s2 = 0; s2 < dirs_[1].spans.size(); ++s2)
        for (std::size_t s3 = 0; s3 < dirs_[2].spans.size(); ++s3) {
          fill_span({s1, s2, s3}, data);
          f(static_cast<const SweepSpan&>(data));
        }
  }

 private:
  struct Direction {
    std::vector<int> spans;                              // non-empty span indices
    std::vector<std::vector<double>> t;                  // per span, q points
    std::vector<std::vector<double>> w;                  // per span, q weights (scaled)
    std::vector<std::vector<SpanDerivatives>> ders;      // per span, q evaluations
  };

  void fill_span(std::array<std::size_t, 3> s, SweepSpan& data) const;

  const Patch& patch_;
  int q_;
  std::array<Direction, 3> dirs_;
};

/// Gauss points per direction used for Galerkin assembly: degree + 1.
int default_quadrature_order(const Patch& patch);

}  // namespace dislocgeo
