#include "elastic_solver.hpp"
#include "tensor_preconditioner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dislocgeo {

void Material::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::InvalidArgument, "material: mu must be positive");
  if (nu == 0.5) throw Error(ErrorCode::InvalidArgument, "material: nu = 0.5 is the incompressible limit");
  if (!(nu > -1.0 && nu < 0.5)) throw Error(ErrorCode::InvalidArgument, "material: nu must lie in (-1, 0.5)");
}

double Material::lame_lambda() const { return 2.0 * mu * nu / (1.0 - 2.0 * nu); }

Mat3 green_strain(const Mat3& grad_y, const Mat3& vartheta) {
  Mat3 e{};
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += grad_y[i][k] * grad_y[i][l] - vartheta[i][k] * vartheta[i][l];
      e[k][l] = 0.5 * s;
    }
  return e;
}

Tensor4 elastic_coefficients(const Mat3& g, const Material& m) {
  const double lam = m.lame_lambda();
  Tensor4 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          c[27 * i + 9 * j + 3 * k + l] = lam * g[i][j] * g[k][l] + m.mu * (g[i][k] * g[j][l] + g[i][l] * g[j][k]);
  return c;
}

Mat3 second_pk_stress(const Tensor4& c, const Mat3& e) {
  Mat3 s{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) v += c[27 * i + 9 * j + 3 * k + l] * e[k][l];
      s[i][j] = v;
    }
  return s;
}

Mat3 svk_stress(const Mat3& g, const Mat3& e, const Material& m) {
  const Mat3 ge = matmul(g, e);
  const Mat3 geg = matmul(ge, g);
  const double tr = ge[0][0] + ge[1][1] + ge[2][2];
  const double lam = m.lame_lambda();
  Mat3 s{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s[i][j] = lam * tr * g[i][j] + 2.0 * m.mu * geg[i][j];
  return s;
}

BoundarySpec corner_pinning(const Patch& patch) {
  const auto c = patch.basis.counts();
  BoundarySpec b;
  const int a0 = patch.basis.index(0, 0, 0);
  const int a1 = patch.basis.index(c[0] - 1, 0, 0);
  const int a2 = patch.basis.index(0, c[1] - 1, 0);
  b.pinned = {3 * a0, 3 * a0 + 1, 3 * a0 + 2, 3 * a1 + 1, 3 * a1 + 2, 3 * a2 + 2};
  b.description = "corner (-,-,-): y1 y2 y3; corner (+,-,-): y2 y3; corner (-,+,-): y3";
  return b;
}

ElasticState ElasticState::identity(const Patch& patch) {
  ElasticState s;
  s.y.resize(3 * patch.control_points.size());
  for (std::size_t a = 0; a < patch.control_points.size(); ++a)
    for (int m = 0; m < 3; ++m) s.y[3 * a + m] = patch.control_points[a][m];
  return s;
}

namespace {

struct PointState {
  Mat3 F{};
  Mat3 G{};
  Mat3 E{};
  Mat3 S{};
  double det_vartheta = 1.0;
  double det_f = 1.0;
};

void check_problem(const ElasticProblem& p, const ElasticState& s) {
  if (!p.plastic) throw Error(ErrorCode::InvalidArgument, "elastic problem: no plastic field");
  p.material.validate();
  const std::size_t n = p.plastic->patch.control_points.size();
  if (s.y.size() != 3 * n) throw Error(ErrorCode::InvalidArgument, "elastic state does not match the patch");
  for (int d : p.boundary.pinned)
    if (d < 0 || static_cast<std::size_t>(d) >= 3 * n)
      throw Error(ErrorCode::InvalidArgument, "elastic problem: pinned dof out of range");
}

PointState point_state(const ElasticProblem& p, const ElasticState& s, const std::vector<int>& idx,
                       const std::vector<double>& N, const std::vector<Vec3>& grad) {
  PointState ps;
  Mat3 vt = identity3();
  const auto& th = p.plastic->theta;
  const auto& cp = p.plastic->patch.control_points;
  // grad x = I exactly for the isoparametric map, so F = I + grad(y - x)
  ps.F = identity3();
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const std::size_t ga = static_cast<std::size_t>(idx[a]);
    const double* c = &th[9 * ga];
    for (int i = 0; i < 9; ++i) vt[i / 3][i % 3] += N[a] * c[i];
    for (int m = 0; m < 3; ++m) {
      const double u = s.y[3 * ga + m] - cp[ga][m];
      if (u == 0.0) continue;
      for (int j = 0; j < 3; ++j) ps.F[m][j] += u * grad[a][j];
    }
  }
  ps.det_vartheta = det3(vt);
  if (!(ps.det_vartheta > 0.0)) throw Error(ErrorCode::DegeneratePlasticity, "det(I + Theta) <= 0");
  ps.det_f = det3(ps.F);
  if (!(ps.det_f > 0.0)) throw Error(ErrorCode::InvertedElement, "det(grad y) <= 0 at a quadrature point");
  Mat3 g{};
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i) g[k][l] += vt[i][k] * vt[i][l];
  ps.G = inverse3(g, det3(g));
  ps.E = green_strain(ps.F, vt);
  ps.S = svk_stress(ps.G, ps.E, p.material);
  return ps;
}

template <class F>
void sweep(const ElasticProblem& p, const ElasticState& s, F&& f) {
  const Patch& patch = p.plastic->patch;
  QuadratureSweep q(patch, default_quadrature_order(patch));
  q.for_each_span([&](const SweepSpan& span) {
    for (const SweepPoint& pt : span.points) f(span, pt, point_state(p, s, span.indices, pt.N, pt.grad));
  });
}

}  // namespace

double strain_energy(const ElasticProblem& p, const ElasticState& s) {
  check_problem(p, s);
  double w = 0.0;
  sweep(p, s, [&](const SweepSpan&, const SweepPoint& pt, const PointState& ps) {
    double se = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) se += ps.S[i][j] * ps.E[i][j];
    w += 0.5 * se * ps.det_vartheta * pt.weight;
  });
  return w;
}

std::vector<double> residual_vector(const ElasticProblem& p, const ElasticState& s) {
  check_problem(p, s);
  std::vector<double> f(s.y.size(), 0.0);
  sweep(p, s, [&](const SweepSpan& span, const SweepPoint& pt, const PointState& ps) {
    const double w = ps.det_vartheta * pt.weight;
    // P = F S: P[m][i] = F^m_j S^{ji}
    Mat3 P{};
    for (int m = 0; m < 3; ++m)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) P[m][i] += ps.F[m][j] * ps.S[j][i];
    for (std::size_t a = 0; a < span.indices.size(); ++a) {
      const Vec3& g = pt.grad[a];
      double* dst = &f[3 * static_cast<std::size_t>(span.indices[a])];
      for (int m = 0; m < 3; ++m) dst[m] += w * (P[m][0] * g[0] + P[m][1] * g[1] + P[m][2] * g[2]);
    }
  });
  for (int d : p.boundary.pinned) f[d] = 0.0;
  return f;
}

SparseSymMatrix tangent_matrix(const ElasticProblem& p, const ElasticState& s, bool initial_stress) {
  check_problem(p, s);
  const Patch& patch = p.plastic->patch;
  const auto counts = patch.basis.counts();
  const std::array<int, 3> band{patch.basis.knots[0].degree, patch.basis.knots[1].degree,
                                patch.basis.knots[2].degree};
  SparseSymMatrix k = SparseSymMatrix::tensor_pattern(counts, band, 3);
  TensorBlockIndex index(k, counts, band);
  const double lam = p.material.lame_lambda();
  const double mu = p.material.mu;

  std::vector<double> local;
  std::vector<Vec3> sg, gg, u;
  QuadratureSweep q(patch, default_quadrature_order(patch));
  q.for_each_span([&](const SweepSpan& span) {
    const std::size_t m = span.indices.size();
    local.assign(m * m * 9, 0.0);
    sg.resize(m);
    gg.resize(m);
    u.resize(m);
    for (const SweepPoint& pt : span.points) {
      const PointState ps = point_state(p, s, span.indices, pt.N, pt.grad);
      const double w = ps.det_vartheta * pt.weight;
      Mat3 GF{};  // column n: G F^n
      Mat3 H{};   // F^m . G F^n
      for (int i = 0; i < 3; ++i)
        for (int n = 0; n < 3; ++n)
          for (int j = 0; j < 3; ++j) GF[i][n] += ps.G[i][j] * ps.F[n][j];
      for (int mm = 0; mm < 3; ++mm)
        for (int n = 0; n < 3; ++n)
          for (int i = 0; i < 3; ++i) H[mm][n] += ps.F[mm][i] * GF[i][n];
      for (std::size_t a = 0; a < m; ++a) {
        const Vec3& g = pt.grad[a];
        for (int i = 0; i < 3; ++i) {
          sg[a][i] = ps.S[i][0] * g[0] + ps.S[i][1] * g[1] + ps.S[i][2] * g[2];
          gg[a][i] = ps.G[i][0] * g[0] + ps.G[i][1] * g[1] + ps.G[i][2] * g[2];
          u[a][i] = g[0] * GF[0][i] + g[1] * GF[1][i] + g[2] * GF[2][i];
        }
      }
      for (std::size_t a = 0; a < m; ++a) {
        const Vec3& ga = pt.grad[a];
        for (std::size_t b = a; b < m; ++b) {
          const double sab = initial_stress ? w * dot(ga, sg[b]) : 0.0;
          const double gab = w * mu * dot(ga, gg[b]);
          double* blk = &local[(a * m + b) * 9];
          for (int mm = 0; mm < 3; ++mm)
            for (int n = 0; n < 3; ++n)
              blk[3 * mm + n] += (mm == n ? sab : 0.0) + w * lam * u[a][mm] * u[b][n] + gab * H[mm][n] +
                                 w * mu * u[a][n] * u[b][mm];
        }
      }
    }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        const double* blk = &local[(a * m + b) * 9];
        double* dst = k.block(index.position(span.indices[a], span.indices[b]));
        for (int e = 0; e < 9; ++e) dst[e] += blk[e];
        if (a == b) continue;
        double* tr = k.block(index.position(span.indices[b], span.indices[a]));
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) tr[3 * c + r] += blk[3 * r + c];
      }
  });
  return k;
}

NewtonResult newton_solve(const ElasticProblem& p, const SolverConfig& config) {
  config.validate();
  if (!p.plastic) throw Error(ErrorCode::InvalidArgument, "elastic problem: no plastic field");
  const Patch& patch = p.plastic->patch;
  NewtonResult out;
  out.state = ElasticState::identity(patch);
  check_problem(p, out.state);
  const std::size_t ndof = out.state.y.size();
  std::vector<char> fixed(ndof, 0);
  for (int d : p.boundary.pinned) fixed[d] = 1;

  double force_scale = 0.0;
  {
    std::vector<double> g(patch.control_points.size(), 0.0);
    QuadratureSweep q(patch, default_quadrature_order(patch));
    q.for_each_span([&](const SweepSpan& span) {
      for (const SweepPoint& pt : span.points)
        for (std::size_t a = 0; a < span.indices.size(); ++a) g[span.indices[a]] += norm(pt.grad[a]) * pt.weight;
    });
    for (double v : g) force_scale += v * v;
    force_scale = p.material.mu * std::sqrt(force_scale);
  }
  const double floor = 1e-12 * force_scale;

  std::unique_ptr<Preconditioner> tensor;
  if (p.preconditioner == ElasticPreconditioner::TensorLaplace)
    tensor = std::make_unique<ElasticTensorPreconditioner>(patch, p.material.mu, p.material.lame_lambda(), fixed);

  std::vector<double> f = residual_vector(p, out.state);
  double fn = norm2(f);
  out.initial_residual = fn;
  out.history.push_back({0, fn, strain_energy(p, out.state), 0, 0.0, true});

  for (int it = 1;; ++it) {
    if (it > 1 && (fn <= config.newton_tol * out.initial_residual || fn <= floor)) break;
    if (it > config.newton_max_iter) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "newton: no convergence after %d iterations (residual %.3e)",
                    config.newton_max_iter, fn);
      throw ConvergenceError(buf, fn, config.newton_max_iter);
    }
    std::vector<double> rhs(ndof);
    for (std::size_t i = 0; i < ndof; ++i) rhs[i] = fixed[i] ? 0.0 : -f[i];
    SolveResult lin;
    bool full = true;
    for (;;) {
      SparseSymMatrix k = tangent_matrix(p, out.state, full);
      k.constrain(fixed);
      std::unique_ptr<Preconditioner> jac;
      const Preconditioner* prec = tensor.get();
      if (!prec) {
        jac = jacobi_preconditioner(k);
        prec = jac.get();
      }
      try {
        lin = pcg_solve(k, rhs, *prec, config.pcg_tol, config.pcg_max_iter);
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Indefinite || !full) throw;
        full = false;
      }
    }

    double step = 1.0;
    ElasticState trial;
    std::vector<double> ft;
    double ftn = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= config.max_backtracks; ++bt, step *= 0.5) {
      trial.y = out.state.y;
      for (std::size_t i = 0; i < ndof; ++i) trial.y[i] += step * lin.x[i];
      try {
        ft = residual_vector(p, trial);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InvertedElement) throw;
        continue;
      }
      ftn = norm2(ft);
      if (ftn <= fn || ftn <= floor) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "newton: line search failed at iteration %d (residual %.3e)", it, fn);
      throw ConvergenceError(buf, fn, it);
    }
    out.state = std::move(trial);
    f = std::move(ft);
    fn = ftn;
    out.iterations = it;
    out.history.push_back({it, fn, strain_energy(p, out.state), lin.iterations, step, full});
  }
  out.final_residual = fn;
  return out;
}

StressEval stress_at(const ElasticProblem& p, const ElasticState& s, const Vec3& t) {
  check_problem(p, s);
  const Patch& patch = p.plastic->patch;
  const NurbsEval e = nurbs_basis(patch.basis, t);
  const JacobianEval j = jacobian(patch, t);
  std::vector<Vec3> grad(e.indices.size());
  for (std::size_t a = 0; a < e.indices.size(); ++a)
    for (int d = 0; d < 3; ++d)
      grad[a][d] = e.param_gradients[a][0] * j.inv[0][d] + e.param_gradients[a][1] * j.inv[1][d] +
                   e.param_gradients[a][2] * j.inv[2][d];
  const PointState ps = point_state(p, s, e.indices, e.values, grad);
  StressEval r;
  r.S = ps.S;
  r.E = ps.E;
  r.F = ps.F;
  r.det_vartheta = ps.det_vartheta;
  const Mat3 fs = matmul(ps.F, ps.S);
  const Mat3 c = matmul(fs, transpose(ps.F));
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.cauchy[i][k] = c[i][k] * ps.det_vartheta / ps.det_f;
  return r;
}

void save_elastic_state(const ElasticState& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << "dislocgeo-elastic-state 1\n" << s.y.size() << '\n';
  char buf[32];
  for (double v : s.y) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    f << buf;
  }
  if (!f) throw Error(ErrorCode::Io, "write failed: " + path);
}

ElasticState load_elastic_state(const std::string& path, std::size_t expected_size) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string magic;
  int version = 0;
  std::size_t n = 0;
  f >> magic >> version >> n;
  if (!f || magic != "dislocgeo-elastic-state" || version != 1)
    throw Error(ErrorCode::Io, path + ": not an elastic state file");
  if (n != expected_size) throw Error(ErrorCode::InvalidArgument, path + ": state size does not match the patch");
  ElasticState s;
  s.y.resize(n);
  for (auto& v : s.y)
    if (!(f >> v)) throw Error(ErrorCode::Io, path + ": truncated state");
  return s;
}

void write_newton_history_csv(const std::string& path, const std::vector<NewtonRecord>& h) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << "iteration,residual,energy,pcg_iterations,step,full_tangent\n";
  char buf[160];
  for (const auto& r : h) {
    std::snprintf(buf, sizeof buf, "%d,%.10e,%.10e,%d,%.6g,%d\n", r.iteration, r.residual, r.energy, r.pcg_iterations,
                  r.step, r.full_tangent ? 1 : 0);
    f << buf;
  }
}

}  // namespace dislocgeo
