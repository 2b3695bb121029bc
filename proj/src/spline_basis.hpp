#pragma once

#include <array>
#include <vector>

#include "common.hpp"

namespace dislocgeo {

/// Open (clamped) knot vector of a given degree.
struct KnotVector {
  std::vector<double> values;
  int degree = 0;

  KnotVector() = default;
  KnotVector(std::vector<double> v, int p);

  int num_basis() const { return static_cast<int>(values.size()) - degree - 1; }
  double front() const { return values.front(); }
  double back() const { return values.back(); }

  /// Throws InvalidArgument unless the knot vector is non-decreasing, clamped
  /// and long enough for its degree.
  void validate() const;

  /// Index s of the span with values[s] <= t < values[s+1]; t == back() maps
  /// to the last non-empty span. Throws Domain outside [front, back].
  int find_span(double t) const;

  /// Distinct breakpoints (knot values without repetition).
  std::vector<double> breakpoints() const;
};

struct SpanValues {
  int span = 0;                // knot span index; first active basis is span - degree
  std::vector<double> values;  // degree + 1 nonzero basis values
};

struct SpanDerivatives {
  int span = 0;
  /// ders[k][j]: k-th derivative of basis (span - degree + j).
  std::vector<std::vector<double>> ders;
};

SpanValues bspline_eval_span(const KnotVector& kv, double t);

/// Values and derivatives up to `order` (0..2). Orders above the degree are
/// returned as zeros.
SpanDerivatives bspline_derivatives(const KnotVector& kv, double t, int order);

/// Tensor-product NURBS basis. The global index of basis (i1, i2, i3) is
/// alpha = i1 + n1 * (i2 + n2 * i3), i.e. the first direction runs fastest.
struct TensorBasis3D {
  std::array<KnotVector, 3> knots;

  TensorBasis3D() = default;
  /// Uniform unit weights.
  explicit TensorBasis3D(std::array<KnotVector, 3> kv);
  TensorBasis3D(std::array<KnotVector, 3> kv, std::vector<double> w);

  void validate() const;

  std::array<int, 3> counts() const {
    return {knots[0].num_basis(), knots[1].num_basis(), knots[2].num_basis()};
  }
  int size() const {
    auto c = counts();
    return c[0] * c[1] * c[2];
  }
  int index(int i1, int i2, int i3) const {
    auto c = counts();
    return i1 + c[0] * (i2 + c[1] * i3);
  }
  std::array<int, 3> multi_index(int alpha) const {
    auto c = counts();
    return {alpha % c[0], (alpha / c[0]) % c[1], alpha / (c[0] * c[1])};
  }
  const std::vector<double>& weights() const { return weights_; }
  bool uniform_weights() const { return !rational_; }

 private:
  std::vector<double> weights_;  // one per basis function, all > 0
  bool rational_ = false;
};

/// Nonzero NURBS functions at one parameter point.
struct NurbsEval {
  std::vector<int> indices;             // global alpha of each active function
  std::vector<double> values;           // N^alpha
  std::vector<Vec3> param_gradients;    // dN^alpha / dt^k
};

NurbsEval nurbs_basis(const TensorBasis3D& basis, const Vec3& t);

/// Combines per-direction 1D evaluations (value and first derivative, as from
/// bspline_derivatives with order >= 1) into NURBS values and parameter
/// gradients, applying the rational correction when weights are not uniform.
void combine_tensor(const TensorBasis3D& basis,
                    const std::array<const SpanDerivatives*, 3>& dir,
                    NurbsEval& out);

/// Knot grading: interior knots u_k = k / (n - p) are mapped through
/// s -> 0.5 + 0.5 * sign(2s - 1) * |2s - 1|^gamma, which clusters them around
/// 0.5 for gamma > 1. gamma == 1 is uniform.
struct GradingSpec {
  double gamma = 1.0;
};

KnotVector make_graded_knot_vector(int n, int p, GradingSpec grading = {});

}  // namespace dislocgeo
