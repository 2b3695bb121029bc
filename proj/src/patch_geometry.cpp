#include "patch_geometry.hpp"

#include <algorithm>
#include <cstdio>

namespace dislocgeo {

Patch::Patch(TensorBasis3D b, std::vector<Vec3> cps)
    : basis(std::move(b)), control_points(std::move(cps)) {
  if (!control_points.empty()) {
    box_lo = box_hi = control_points.front();
    for (const auto& p : control_points)
      for (int d = 0; d < 3; ++d) {
        box_lo[d] = std::min(box_lo[d], p[d]);
        box_hi[d] = std::max(box_hi[d], p[d]);
      }
  }
}

void Patch::validate() const {
  basis.validate();
  if (static_cast<int>(control_points.size()) != basis.size())
    throw Error(ErrorCode::InvalidArgument, "patch: control point count does not match basis");
}

std::vector<double> greville_points(const KnotVector& kv) {
  const int n = kv.num_basis();
  const int p = kv.degree;
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (p == 0) {
      g[i] = 0.5 * (kv.values[i] + kv.values[i + 1]);
      continue;
    }
    double s = 0.0;
    for (int k = 1; k <= p; ++k) s += kv.values[i + k];
    g[i] = s / p;
  }
  return g;
}

Patch make_box_patch(const TensorBasis3D& basis, const Vec3& extents) {
  basis.validate();
  for (double L : extents)
    if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "box patch: extents must be positive");
  std::array<std::vector<double>, 3> g;
  for (int d = 0; d < 3; ++d) {
    g[d] = greville_points(basis.knots[d]);
    // Greville points live on [front, back]; normalise to [0, 1].
    const double a = basis.knots[d].front(), b = basis.knots[d].back();
    for (auto& v : g[d]) v = (v - a) / (b - a);
  }
  const auto c = basis.counts();
  std::vector<Vec3> cps(static_cast<std::size_t>(basis.size()));
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i)
        cps[basis.index(i, j, k)] = {extents[0] * (g[0][i] - 0.5), extents[1] * (g[1][j] - 0.5),
                                     extents[2] * (g[2][k] - 0.5)};
  return Patch(basis, std::move(cps));
}

void require_axis_aligned_faces(const Patch& patch) {
  patch.validate();
  const auto c = patch.basis.counts();
  for (int d = 0; d < 3; ++d)
    for (int side = 0; side < 2; ++side) {
      const int fixed = side == 0 ? 0 : c[d] - 1;
      const double ref = side == 0 ? patch.box_lo[d] : patch.box_hi[d];
      const double tol = 1e-12 * std::max(1.0, patch.box_hi[d] - patch.box_lo[d]);
      for (int k = 0; k < c[2]; ++k)
        for (int j = 0; j < c[1]; ++j)
          for (int i = 0; i < c[0]; ++i) {
            const int idx[3] = {i, j, k};
            if (idx[d] != fixed) continue;
            if (std::abs(patch.control_points[patch.basis.index(i, j, k)][d] - ref) > tol)
              throw Error(ErrorCode::UnsupportedGeometry, "patch faces are not axis-aligned planes");
          }
    }
}

Vec3 geometry_map(const Patch& patch, const Vec3& t) {
  const NurbsEval e = nurbs_basis(patch.basis, t);
  Vec3 x{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < e.indices.size(); ++a)
    for (int d = 0; d < 3; ++d) x[d] += e.values[a] * patch.control_points[e.indices[a]][d];
  return x;
}

namespace {

JacobianEval jacobian_from(const Patch& patch, const std::vector<int>& idx,
                           const std::vector<Vec3>& dt) {
  JacobianEval r;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Vec3& cp = patch.control_points[idx[a]];
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) r.J[i][k] += cp[i] * dt[a][k];
  }
  r.det = det3(r.J);
  if (!(r.det > 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "geometry map is singular or inverted (det J = %.6g)", r.det);
    throw Error(ErrorCode::SingularGeometry, buf);
  }
  r.inv = inverse3(r.J, r.det);
  return r;
}

}  // namespace

JacobianEval jacobian(const Patch& patch, const Vec3& t) {
  const NurbsEval e = nurbs_basis(patch.basis, t);
  return jacobian_from(patch, e.indices, e.param_gradients);
}

Vec3 inverse_map(const Patch& patch, const Vec3& x) {
  const double tol = 1e-12;
  for (int d = 0; d < 3; ++d) {
    const double slack = tol * std::max(1.0, patch.box_hi[d] - patch.box_lo[d]);
    if (x[d] < patch.box_lo[d] - slack || x[d] > patch.box_hi[d] + slack)
      throw Error(ErrorCode::Domain, "point outside the patch bounding box");
  }
  Vec3 t;
  for (int d = 0; d < 3; ++d) {
    const auto& kv = patch.basis.knots[d];
    const double s = (x[d] - patch.box_lo[d]) / (patch.box_hi[d] - patch.box_lo[d]);
    t[d] = kv.front() + std::clamp(s, 0.0, 1.0) * (kv.back() - kv.front());
  }
  for (int it = 0; it < 50; ++it) {
    const Vec3 y = geometry_map(patch, t);
    Vec3 r{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
    const double scale = std::max(1.0, norm(patch.extents()));
    if (norm(r) <= 1e-13 * scale) return t;
    const JacobianEval j = jacobian(patch, t);
    for (int k = 0; k < 3; ++k) {
      double dt = 0.0;
      for (int i = 0; i < 3; ++i) dt += j.inv[k][i] * r[i];
      const auto& kv = patch.basis.knots[k];
      t[k] = std::clamp(t[k] + dt, kv.front(), kv.back());
    }
  }
  const Vec3 y = geometry_map(patch, t);
  Vec3 r{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
  if (norm(r) > 1e-8 * std::max(1.0, norm(patch.extents())))
    throw Error(ErrorCode::Domain, "point is not in the image of the patch");
  return t;
}

GaussRule gauss_rule(int q) {
  if (q < 1 || q > 10) throw Error(ErrorCode::InvalidArgument, "gauss_rule: q must be in 1..10");
  GaussRule r;
  r.points.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_q(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pq = q == 1 ? x : p1;
      const double pqm1 = q == 1 ? 1.0 : p0;
      dp = q * (x * pq - pqm1) / (x * x - 1.0);
      const double dx = pq / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pq = q == 1 ? x : p1;
    const double pqm1 = q == 1 ? 1.0 : p0;
    dp = q * (x * pq - pqm1) / (x * x - 1.0);
    r.points[q - 1 - i] = x;
    r.weights[q - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Exact symmetry of the rule.
  for (int i = 0; i < q / 2; ++i) {
    const double x = 0.5 * (r.points[q - 1 - i] - r.points[i]);
    const double w = 0.5 * (r.weights[q - 1 - i] + r.weights[i]);
    r.points[i] = -x;
    r.points[q - 1 - i] = x;
    r.weights[i] = r.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) r.points[q / 2] = 0.0;
  return r;
}

int default_quadrature_order(const Patch& patch) {
  int p = 0;
  for (const auto& kv : patch.basis.knots) p = std::max(p, kv.degree);
  return std::min(10, p + 1);
}

QuadratureSweep::QuadratureSweep(const Patch& patch, int q) : patch_(patch), q_(q) {
  patch.validate();
  const GaussRule g = gauss_rule(q);
  for (int d = 0; d < 3; ++d) {
    const auto& kv = patch.basis.knots[d];
    auto& dir = dirs_[d];
    for (int s = kv.degree; s < kv.num_basis(); ++s) {
      const double a = kv.values[s], b = kv.values[s + 1];
      if (!(b > a)) continue;
      dir.spans.push_back(s);
      std::vector<double> ts(q), ws(q);
      std::vector<SpanDerivatives> ds;
      ds.reserve(q);
      for (int i = 0; i < q; ++i) {
        ts[i] = 0.5 * (a + b) + 0.5 * (b - a) * g.points[i];
        ws[i] = 0.5 * (b - a) * g.weights[i];
        SpanDerivatives e = bspline_derivatives(kv, ts[i], 1);
        // Keep the span the point was generated for, even on shared knots.
        e.span = s;
        ds.push_back(std::move(e));
      }
      dir.t.push_back(std::move(ts));
      dir.w.push_back(std::move(ws));
      dir.ders.push_back(std::move(ds));
    }
  }
}

std::size_t QuadratureSweep::num_spans() const {
  return dirs_[0].spans.size() * dirs_[1].spans.size() * dirs_[2].spans.size();
}

void QuadratureSweep::fill_span(std::array<std::size_t, 3> s, SweepSpan& data) const {
  const int q = q_;
  data.span = {dirs_[0].spans[s[0]], dirs_[1].spans[s[1]], dirs_[2].spans[s[2]]};
  data.points.resize(static_cast<std::size_t>(q) * q * q);
  NurbsEval e;
  std::size_t n = 0;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int c = 0; c < q; ++c, ++n) {
        combine_tensor(patch_.basis,
                       {&dirs_[0].ders[s[0]][a], &dirs_[1].ders[s[1]][b], &dirs_[2].ders[s[2]][c]}, e);
        if (n == 0) data.indices = e.indices;
        SweepPoint& pt = data.points[n];
        pt.t = {dirs_[0].t[s[0]][a], dirs_[1].t[s[1]][b], dirs_[2].t[s[2]][c]};
        const JacobianEval j = jacobian_from(patch_, e.indices, e.param_gradients);
        pt.det_j = j.det;
        pt.weight = dirs_[0].w[s[0]][a] * dirs_[1].w[s[1]][b] * dirs_[2].w[s[2]][c] * j.det;
        pt.x = {0.0, 0.0, 0.0};
        const std::size_t m = e.indices.size();
        pt.N.resize(m);
        pt.grad.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
          const Vec3& cp = patch_.control_points[e.indices[i]];
          for (int d = 0; d < 3; ++d) pt.x[d] += e.values[i] * cp[d];
          pt.N[i] = e.values[i];
          const Vec3& g = e.param_gradients[i];
          for (int d = 0; d < 3; ++d)
            pt.grad[i][d] = g[0] * j.inv[0][d] + g[1] * j.inv[1][d] + g[2] * j.inv[2][d];
        }
      }
}

std::vector<QuadPoint> assemble_quadrature(const Patch& patch, int q) {
  QuadratureSweep sweep(patch, q);
  std::vector<QuadPoint> out;
  out.reserve(sweep.num_spans() * static_cast<std::size_t>(q * q * q));
  sweep.for_each_span([&](const SweepSpan& s) {
    for (const auto& p : s.points) out.push_back({p.t, p.weight});
  });
  return out;
}

}  // namespace dislocgeo
