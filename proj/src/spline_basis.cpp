#include "spline_basis.hpp"

#include <algorithm>
#include <cstdio>

namespace dislocgeo {

KnotVector::KnotVector(std::vector<double> v, int p) : values(std::move(v)), degree(p) {}

void KnotVector::validate() const {
  const int p = degree;
  const int m = static_cast<int>(values.size());
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "knot vector: negative degree");
  if (m < 2 * (p + 1))
    throw Error(ErrorCode::InvalidArgument, "knot vector: need at least 2(p+1) knots");
  for (int i = 1; i < m; ++i)
    if (!(values[i] >= values[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "knot vector: values must be non-decreasing");
  for (int i = 1; i <= p; ++i) {
    if (values[i] != values[0] || values[m - 1 - i] != values[m - 1])
      throw Error(ErrorCode::InvalidArgument, "knot vector: must be open (clamped)");
  }
  if (!(values[m - 1] > values[0]))
    throw Error(ErrorCode::InvalidArgument, "knot vector: empty parameter range");
}

int KnotVector::find_span(double t) const {
  const int n = num_basis();
  const double a = values.front();
  const double b = values.back();
  if (!(t >= a && t <= b)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "parameter %.17g outside [%.17g, %.17g]", t, a, b);
    throw Error(ErrorCode::Domain, buf);
  }
  // Closed right end: the last non-empty span, which is n - 1 for a clamped vector.
  if (t >= values[n]) return n - 1;
  // First knot strictly greater than t, minus one.
  auto it = std::upper_bound(values.begin() + degree, values.begin() + n + 1, t);
  return static_cast<int>(it - values.begin()) - 1;
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> out;
  for (double v : values)
    if (out.empty() || v != out.back()) out.push_back(v);
  return out;
}

SpanValues bspline_eval_span(const KnotVector& kv, double t) {
  auto d = bspline_derivatives(kv, t, 0);
  return {d.span, std::move(d.ders[0])};
}

// Values and derivatives of the p+1 nonzero basis functions on a span
// (Piegl & Tiller, algorithm A2.3). Zero denominators contribute 0.
SpanDerivatives bspline_derivatives(const KnotVector& kv, double t, int order) {
  if (order < 0 || order > 2)
    throw Error(ErrorCode::InvalidArgument, "bspline_derivatives: order must be in 0..2");
  const int p = kv.degree;
  const int span = kv.find_span(t);
  const auto& U = kv.values;

  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  std::vector<double> left(p + 1, 0.0), right(p + 1, 0.0);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - U[span + 1 - j];
    right[j] = U[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[j][r] != 0.0 ? ndu[r][j - 1] / ndu[j][r] : 0.0;
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }

  SpanDerivatives out;
  out.span = span;
  out.ders.assign(order + 1, std::vector<double>(p + 1, 0.0));
  for (int j = 0; j <= p; ++j) out.ders[0][j] = ndu[j][p];

  const int top = std::min(order, p);
  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[s2][0] = ndu[pk + 1][rk] != 0.0 ? a[s1][0] / ndu[pk + 1][rk] : 0.0;
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = ndu[pk + 1][rk + j] != 0.0
                       ? (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j]
                       : 0.0;
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = ndu[pk + 1][r] != 0.0 ? -a[s1][k - 1] / ndu[pk + 1][r] : 0.0;
        d += a[s2][k] * ndu[r][pk];
      }
      out.ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int k = 1; k <= top; ++k) {
    for (int j = 0; j <= p; ++j) out.ders[k][j] *= factor;
    factor *= (p - k);
  }
  return out;
}

TensorBasis3D::TensorBasis3D(std::array<KnotVector, 3> kv) : knots(std::move(kv)) {
  weights_.assign(static_cast<std::size_t>(size()), 1.0);
}

TensorBasis3D::TensorBasis3D(std::array<KnotVector, 3> kv, std::vector<double> w)
    : knots(std::move(kv)), weights_(std::move(w)) {
  rational_ = !std::all_of(weights_.begin(), weights_.end(), [](double x) { return x == 1.0; });
}

void TensorBasis3D::validate() const {
  for (const auto& k : knots) k.validate();
  if (static_cast<int>(weights_.size()) != size())
    throw Error(ErrorCode::InvalidArgument, "tensor basis: weight count mismatch");
  for (double w : weights_)
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "tensor basis: weights must be positive");
}

void combine_tensor(const TensorBasis3D& basis, const std::array<const SpanDerivatives*, 3>& dir,
                    NurbsEval& out) {
  const int p1 = basis.knots[0].degree, p2 = basis.knots[1].degree, p3 = basis.knots[2].degree;
  const int count = (p1 + 1) * (p2 + 1) * (p3 + 1);
  out.indices.resize(count);
  out.values.resize(count);
  out.param_gradients.resize(count);
  const auto c = basis.counts();
  const int f1 = dir[0]->span - p1, f2 = dir[1]->span - p2, f3 = dir[2]->span - p3;
  const auto& b1 = dir[0]->ders;
  const auto& b2 = dir[1]->ders;
  const auto& b3 = dir[2]->ders;

  int a = 0;
  for (int k = 0; k <= p3; ++k)
    for (int j = 0; j <= p2; ++j)
      for (int i = 0; i <= p1; ++i, ++a) {
        out.indices[a] = (f1 + i) + c[0] * ((f2 + j) + c[1] * (f3 + k));
        out.values[a] = b1[0][i] * b2[0][j] * b3[0][k];
        out.param_gradients[a] = {b1[1][i] * b2[0][j] * b3[0][k], b1[0][i] * b2[1][j] * b3[0][k],
                                  b1[0][i] * b2[0][j] * b3[1][k]};
      }

  if (basis.uniform_weights()) return;

  // Rational correction: N = wB / W, dN = (w dB - N dW) / W.
  double W = 0.0;
  Vec3 dW{0.0, 0.0, 0.0};
  for (int q = 0; q < count; ++q) {
    const double w = basis.weights()[out.indices[q]];
    W += w * out.values[q];
    for (int d = 0; d < 3; ++d) dW[d] += w * out.param_gradients[q][d];
  }
  for (int q = 0; q < count; ++q) {
    const double w = basis.weights()[out.indices[q]];
    const double N = w * out.values[q] / W;
    for (int d = 0; d < 3; ++d)
      out.param_gradients[q][d] = (w * out.param_gradients[q][d] - N * dW[d]) / W;
    out.values[q] = N;
  }
}

NurbsEval nurbs_basis(const TensorBasis3D& basis, const Vec3& t) {
  SpanDerivatives d0 = bspline_derivatives(basis.knots[0], t[0], 1);
  SpanDerivatives d1 = bspline_derivatives(basis.knots[1], t[1], 1);
  SpanDerivatives d2 = bspline_derivatives(basis.knots[2], t[2], 1);
  NurbsEval out;
  combine_tensor(basis, {&d0, &d1, &d2}, out);
  return out;
}

KnotVector make_graded_knot_vector(int n, int p, GradingSpec grading) {
  if (p < 0 || n < p + 1)
    throw Error(ErrorCode::InvalidArgument, "graded knot vector: need n >= p + 1");
  if (!(grading.gamma >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "graded knot vector: gamma must be >= 1");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n + p + 1));
  for (int i = 0; i <= p; ++i) v.push_back(0.0);
  const int spans = n - p;
  for (int k = 1; k < spans; ++k) {
    const double s = static_cast<double>(k) / spans;
    const double u = 2.0 * s - 1.0;
    const double mapped = 0.5 + 0.5 * std::copysign(std::pow(std::abs(u), grading.gamma), u);
    v.push_back(mapped);
  }
  for (int i = 0; i <= p; ++i) v.push_back(1.0);
  KnotVector kv(std::move(v), p);
  kv.validate();
  return kv;
}

}  // namespace dislocgeo
