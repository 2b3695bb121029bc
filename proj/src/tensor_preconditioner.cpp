#include "tensor_preconditioner.hpp"

#include <Eigen/Dense>

namespace dislocgeo {

Spline1DMatrices spline_1d_matrices(const KnotVector& kv, double length) {
  kv.validate();
  Spline1DMatrices out;
  const int n = kv.num_basis();
  const int p = kv.degree;
  out.n = n;
  out.K.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.M.assign(static_cast<std::size_t>(n) * n, 0.0);
  const double c = length / (kv.back() - kv.front());
  const GaussRule g = gauss_rule(std::min(10, p + 1));
  for (int s = p; s < n; ++s) {
    const double a = kv.values[s], b = kv.values[s + 1];
    if (!(b > a)) continue;
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * g.points[q];
      const double w = 0.5 * (b - a) * g.weights[q];
      SpanDerivatives d = bspline_derivatives(kv, t, 1);
      const int first = s - p;
      for (int i = 0; i <= p; ++i)
        for (int j = 0; j <= p; ++j) {
          const std::size_t k = static_cast<std::size_t>(first + i) * n + first + j;
          out.K[k] += w * d.ders[1][i] * d.ders[1][j] / c;
          out.M[k] += w * d.ders[0][i] * d.ders[0][j] * c;
        }
    }
  }
  return out;
}

Pencil1D make_pencil(const Spline1DMatrices& mats, bool dirichlet) {
  Pencil1D p;
  p.n = mats.n;
  p.dirichlet = dirichlet;
  const int off = dirichlet ? 1 : 0;
  p.m = mats.n - 2 * off;
  if (p.m <= 0) throw Error(ErrorCode::InvalidArgument, "pencil: no interior functions");
  Eigen::MatrixXd K(p.m, p.m), M(p.m, p.m);
  for (int i = 0; i < p.m; ++i)
    for (int j = 0; j < p.m; ++j) {
      K(i, j) = mats.K[static_cast<std::size_t>(i + off) * mats.n + j + off];
      M(i, j) = mats.M[static_cast<std::size_t>(i + off) * mats.n + j + off];
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Internal, "pencil: eigen decomposition failed");
  p.V.resize(static_cast<std::size_t>(p.m) * p.m);
  p.lambda.resize(p.m);
  for (int j = 0; j < p.m; ++j) {
    p.lambda[j] = std::max(0.0, es.eigenvalues()(j));
    for (int i = 0; i < p.m; ++i) p.V[static_cast<std::size_t>(i) * p.m + j] = es.eigenvectors()(i, j);
  }
  return p;
}

KroneckerInverse::KroneckerInverse(std::array<const Pencil1D*, 3> p, std::array<double, 3> a, double shift)
    : p_(p) {
  const int m1 = p[0]->m, m2 = p[1]->m, m3 = p[2]->m;
  inv_diag_.resize(static_cast<std::size_t>(m1) * m2 * m3);
  std::size_t k = 0;
  for (int i3 = 0; i3 < m3; ++i3)
    for (int i2 = 0; i2 < m2; ++i2)
      for (int i1 = 0; i1 < m1; ++i1, ++k) {
        const double d = a[0] * p[0]->lambda[i1] + a[1] * p[1]->lambda[i2] + a[2] * p[2]->lambda[i3] + shift;
        if (!(d > 0.0)) throw Error(ErrorCode::InvalidMatrix, "kronecker inverse: operator is singular");
        inv_diag_[k] = 1.0 / d;
      }
}

namespace {

// out = A u along one direction of an m1 x m2 x m3 array, A = V or V^T.
void along(const Pencil1D& p, bool transpose, int dir, const std::array<int, 3>& m, const std::vector<double>& u,
           std::vector<double>& out) {
  const std::size_t stride = dir == 0 ? 1 : dir == 1 ? m[0] : static_cast<std::size_t>(m[0]) * m[1];
  const int len = m[dir];
  const std::size_t total = static_cast<std::size_t>(m[0]) * m[1] * m[2];
  out.assign(total, 0.0);
  std::vector<double> fiber(len), res(len);
  for (std::size_t base = 0; base < total; ++base) {
    // visit each fiber once, from its first element
    const std::size_t pos = (base / stride) % len;
    if (pos != 0) continue;
    for (int i = 0; i < len; ++i) fiber[i] = u[base + i * stride];
    for (int k = 0; k < len; ++k) {
      double s = 0.0;
      if (transpose)
        for (int i = 0; i < len; ++i) s += p.V[static_cast<std::size_t>(i) * len + k] * fiber[i];
      else
        for (int i = 0; i < len; ++i) s += p.V[static_cast<std::size_t>(k) * len + i] * fiber[i];
      res[k] = s;
    }
    for (int k = 0; k < len; ++k) out[base + k * stride] = res[k];
  }
}

}  // namespace

void KroneckerInverse::apply(const double* r, double* z, int stride) const {
  const std::array<int, 3> m{p_[0]->m, p_[1]->m, p_[2]->m};
  const std::array<int, 3> n{p_[0]->n, p_[1]->n, p_[2]->n};
  const std::array<int, 3> off{p_[0]->dirichlet ? 1 : 0, p_[1]->dirichlet ? 1 : 0, p_[2]->dirichlet ? 1 : 0};
  const std::size_t total = static_cast<std::size_t>(m[0]) * m[1] * m[2];
  std::vector<double> u(total), v;
  auto global = [&](int i1, int i2, int i3) {
    return static_cast<std::size_t>(i1 + off[0]) +
           static_cast<std::size_t>(n[0]) * ((i2 + off[1]) + static_cast<std::size_t>(n[1]) * (i3 + off[2]));
  };
  std::size_t k = 0;
  for (int i3 = 0; i3 < m[2]; ++i3)
    for (int i2 = 0; i2 < m[1]; ++i2)
      for (int i1 = 0; i1 < m[0]; ++i1, ++k) u[k] = r[stride * global(i1, i2, i3)];
  for (int d = 0; d < 3; ++d) {
    along(*p_[d], true, d, m, u, v);
    u.swap(v);
  }
  for (std::size_t i = 0; i < total; ++i) u[i] *= inv_diag_[i];
  for (int d = 0; d < 3; ++d) {
    along(*p_[d], false, d, m, u, v);
    u.swap(v);
  }
  // pass-through for entries outside the active set
  for (int i3 = 0; i3 < n[2]; ++i3)
    for (int i2 = 0; i2 < n[1]; ++i2)
      for (int i1 = 0; i1 < n[0]; ++i1) {
        const bool inside = i1 >= off[0] && i1 < n[0] - off[0] && i2 >= off[1] && i2 < n[1] - off[1] &&
                            i3 >= off[2] && i3 < n[2] - off[2];
        if (!inside) {
          const std::size_t g = i1 + static_cast<std::size_t>(n[0]) * (i2 + static_cast<std::size_t>(n[1]) * i3);
          z[stride * g] = r[stride * g];
        }
      }
  k = 0;
  for (int i3 = 0; i3 < m[2]; ++i3)
    for (int i2 = 0; i2 < m[1]; ++i2)
      for (int i1 = 0; i1 < m[0]; ++i1, ++k) z[stride * global(i1, i2, i3)] = u[k];
}

PlasticTensorPreconditioner::PlasticTensorPreconditioner(const Patch& patch, std::vector<char> fixed)
    : fixed_(std::move(fixed)), n_(patch.basis.size()) {
  const Vec3 L = patch.extents();
  for (int d = 0; d < 3; ++d) {
    const auto mats = spline_1d_matrices(patch.basis.knots[d], L[d]);
    pencils_[d][0] = make_pencil(mats, false);
    pencils_[d][1] = make_pencil(mats, true);
  }
  for (int j = 0; j < 3; ++j) {
    std::array<const Pencil1D*, 3> p;
    for (int d = 0; d < 3; ++d) p[d] = &pencils_[d][d == j ? 1 : 0];
    blocks_.emplace_back(p, std::array<double, 3>{1.0, 1.0, 1.0}, 0.0);
  }
  blocks_.emplace_back(std::array<const Pencil1D*, 3>{&pencils_[0][0], &pencils_[1][0], &pencils_[2][0]},
                       std::array<double, 3>{0.0, 0.0, 0.0}, 1.0);
  if (fixed_.size() != static_cast<std::size_t>(4) * n_)
    throw Error(ErrorCode::InvalidArgument, "plastic preconditioner: mask size mismatch");
}

void PlasticTensorPreconditioner::apply(const std::vector<double>& r, std::vector<double>& z) const {
  std::vector<double> rm = r;
  for (std::size_t i = 0; i < rm.size(); ++i)
    if (fixed_[i]) rm[i] = 0.0;
  z.assign(r.size(), 0.0);
  for (int j = 0; j < 4; ++j) blocks_[j].apply(rm.data() + j, z.data() + j, 4);
  for (std::size_t i = 0; i < z.size(); ++i)
    if (fixed_[i]) z[i] = r[i];
}

ElasticTensorPreconditioner::ElasticTensorPreconditioner(const Patch& patch, double mu, double lame_lambda,
                                                         std::vector<char> fixed)
    : fixed_(std::move(fixed)), n_(patch.basis.size()) {
  const Vec3 L = patch.extents();
  for (int d = 0; d < 3; ++d) pencils_[d] = make_pencil(spline_1d_matrices(patch.basis.knots[d], L[d]), false);
  const double lmax = std::max({L[0], L[1], L[2]});
  const double shift = 1e-2 * mu * (kPi / lmax) * (kPi / lmax);
  for (int m = 0; m < 3; ++m) {
    std::array<double, 3> a{mu, mu, mu};
    a[m] += lame_lambda + mu;
    blocks_.emplace_back(std::array<const Pencil1D*, 3>{&pencils_[0], &pencils_[1], &pencils_[2]}, a, shift);
  }
  if (fixed_.size() != static_cast<std::size_t>(3) * n_)
    throw Error(ErrorCode::InvalidArgument, "elastic preconditioner: mask size mismatch");
}

void ElasticTensorPreconditioner::apply(const std::vector<double>& r, std::vector<double>& z) const {
  std::vector<double> rm = r;
  for (std::size_t i = 0; i < rm.size(); ++i)
    if (fixed_[i]) rm[i] = 0.0;
  z.assign(r.size(), 0.0);
  for (int m = 0; m < 3; ++m) blocks_[m].apply(rm.data() + m, z.data() + m, 3);
  for (std::size_t i = 0; i < z.size(); ++i)
    if (fixed_[i]) z[i] = r[i];
}

}  // namespace dislocgeo
