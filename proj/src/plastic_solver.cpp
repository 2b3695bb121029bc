#include "plastic_solver.hpp"
#include "tensor_preconditioner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dislocgeo {

PlasticField PlasticField::zero(const Patch& patch) {
  PlasticField f;
  f.patch = patch;
  f.theta.assign(static_cast<std::size_t>(patch.basis.size()) * 9, 0.0);
  f.lambda.assign(static_cast<std::size_t>(patch.basis.size()) * 3, 0.0);
  return f;
}

namespace {

std::array<int, 3> degrees(const Patch& patch) {
  return {patch.basis.knots[0].degree, patch.basis.knots[1].degree, patch.basis.knots[2].degree};
}

}  // namespace

PlasticSystem assemble_plastic_system(const Patch& patch, const TorsionField& torsion) {
  patch.validate();
  const auto counts = patch.basis.counts();
  const auto band = degrees(patch);
  const int n = patch.basis.size();
  QuadratureSweep sweep(patch, default_quadrature_order(patch));
  if (sweep.num_spans() == 0) throw Error(ErrorCode::InvalidArgument, "plastic assembly: empty quadrature");

  PlasticSystem sys;
  sys.matrix = SparseSymMatrix::tensor_pattern(counts, band, 4);
  TensorBlockIndex index(sys.matrix, counts, band);
  for (auto& r : sys.rhs) r.assign(static_cast<std::size_t>(4) * n, 0.0);
  sys.vector_laplacian_diag.assign(n, 0.0);
  sys.mass_diag.assign(n, 0.0);

  std::vector<double> local;
  std::vector<Vec3> wg;
  std::vector<double> wn;
  sweep.for_each_span([&](const SweepSpan& span) {
    const std::size_t m = span.indices.size();
    local.assign(m * m * 16, 0.0);
    wg.resize(m);
    wn.resize(m);
    for (const SweepPoint& pt : span.points) {
      const double w = pt.weight;
      for (std::size_t a = 0; a < m; ++a) {
        for (int d = 0; d < 3; ++d) wg[a][d] = w * pt.grad[a][d];
        wn[a] = w * pt.N[a];
      }
      for (std::size_t a = 0; a < m; ++a) {
        const Vec3& ga = pt.grad[a];
        const double na = pt.N[a];
        for (std::size_t b = a; b < m; ++b) {
          const Vec3& gb = wg[b];
          const double gab = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
          double* blk = &local[(a * m + b) * 16];
          for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) blk[4 * j + k] += (j == k ? gab : 0.0) - ga[k] * gb[j];
            blk[4 * j + 3] += ga[j] * wn[b];
            blk[12 + j] += na * gb[j];
          }
        }
      }
      for (std::size_t a = 0; a < m; ++a) {
        const int ga = span.indices[a];
        sys.vector_laplacian_diag[ga] += dot(wg[a], pt.grad[a]);
        sys.mass_diag[ga] += wn[a] * pt.N[a];
      }
      const TwoForm t = torsion.at(pt.x);
      bool any = false;
      for (const auto& row : t)
        for (double v : row) any = any || v != 0.0;
      if (!any) continue;
      // F^a_k = int (t x grad N_a)_k with t_m the dual coefficient of T^i.
      for (std::size_t a = 0; a < m; ++a) {
        const Vec3& g = wg[a];
        double* base[3];
        for (int i = 0; i < 3; ++i) base[i] = &sys.rhs[i][4 * static_cast<std::size_t>(span.indices[a])];
        for (int i = 0; i < 3; ++i) {
          const Vec3& tv = t[i];
          base[i][0] += tv[1] * g[2] - tv[2] * g[1];
          base[i][1] += tv[2] * g[0] - tv[0] * g[2];
          base[i][2] += tv[0] * g[1] - tv[1] * g[0];
        }
      }
    }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        const double* blk = &local[(a * m + b) * 16];
        double* dst = sys.matrix.block(index.position(span.indices[a], span.indices[b]));
        for (int e = 0; e < 16; ++e) dst[e] += blk[e];
        if (b == a) continue;
        double* tr = sys.matrix.block(index.position(span.indices[b], span.indices[a]));
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) tr[4 * c + r] += blk[4 * r + c];
      }
  });
  return sys;
}

void apply_normal_bc(PlasticSystem& system, const Patch& patch) {
  require_axis_aligned_faces(patch);
  const auto c = patch.basis.counts();
  const std::size_t n = static_cast<std::size_t>(patch.basis.size());
  if (system.matrix.size() != static_cast<int>(4 * n))
    throw Error(ErrorCode::InvalidArgument, "apply_normal_bc: system does not match the patch");
  if (system.fixed.size() != 4 * n) system.fixed.assign(4 * n, 0);
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        const int idx[3] = {i, j, k};
        const int a = patch.basis.index(i, j, k);
        for (int d = 0; d < 3; ++d)
          if (idx[d] == 0 || idx[d] == c[d] - 1) system.fixed[4 * a + d] = 1;
      }
  system.matrix.constrain(system.fixed);
  for (auto& r : system.rhs)
    for (std::size_t d = 0; d < r.size(); ++d)
      if (system.fixed[d]) r[d] = 0.0;
}

std::uint64_t torsion_hash(const TorsionField& torsion) {
  std::string s;
  char buf[64];
  for (const auto& d : torsion.specs()) {
    for (double v : {d.burgers[0], d.burgers[1], d.burgers[2], d.line_direction[0], d.line_direction[1],
                     d.line_direction[2], d.core_radius, d.center[0], d.center[1], d.center[2]}) {
      std::snprintf(buf, sizeof buf, "%.17g;", v);
      s += buf;
    }
    s += '|';
  }
  return fnv1a(s);
}

PlasticSolution solve_plastic(const Patch& patch, const TorsionField& torsion, const SolverConfig& config,
                              const PlasticOptions& options) {
  config.validate();
  PlasticSystem sys = assemble_plastic_system(patch, torsion);
  sys.matrix.check_symmetric(1e-10);
  apply_normal_bc(sys, patch);
  const int n = patch.basis.size();
  if (options.pin_lambda) {
    sys.fixed[3] = 1;
    sys.matrix.constrain(sys.fixed);
    for (auto& r : sys.rhs) r[3] = 0.0;
  }

  std::unique_ptr<Preconditioner> prec;
  if (options.preconditioner == PlasticPreconditioner::Tensor) {
    prec = std::make_unique<PlasticTensorPreconditioner>(patch, sys.fixed);
  } else if (options.preconditioner == PlasticPreconditioner::Diagonal) {
    std::vector<double> d(static_cast<std::size_t>(4) * n);
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < 4; ++j) {
        const std::size_t k = 4 * static_cast<std::size_t>(a) + j;
        d[k] = sys.fixed[k] ? 1.0 : (j < 3 ? sys.vector_laplacian_diag[a] : sys.mass_diag[a]);
      }
    prec = std::make_unique<DiagonalPreconditioner>(std::move(d));
  }

  PlasticSolution out;
  out.field = PlasticField::zero(patch);
  out.field.spec_hash = torsion_hash(torsion);
  double worst = 0.0;
  int iterations = 0;
  for (int i = 0; i < 3; ++i) {
    const auto& rhs = sys.rhs[i];
    if (norm2(rhs) == 0.0) {
      out.histories[i] = {0.0};
      continue;
    }
    SolveResult r = minres_solve(sys.matrix, rhs, config.minres_tol, config.minres_max_iter, prec.get());
    worst = std::max(worst, r.final_residual);
    iterations += r.iterations;
    for (int a = 0; a < n; ++a) {
      for (int j = 0; j < 3; ++j) out.field.coeff(a, i, j) = r.x[4 * static_cast<std::size_t>(a) + j];
      out.field.lambda[3 * static_cast<std::size_t>(a) + i] = r.x[4 * static_cast<std::size_t>(a) + 3];
    }
    out.histories[i] = std::move(r.residuals);
  }
  out.report = residual_norms(out.field, torsion);
  out.report.minres_residual = worst;
  out.report.minres_iterations = iterations;
  return out;
}

namespace {

ThetaEval eval_theta(const PlasticField& field, const NurbsEval& e, const JacobianEval& j) {
  ThetaEval r;
  for (std::size_t a = 0; a < e.indices.size(); ++a) {
    const double* c = &field.theta[9 * static_cast<std::size_t>(e.indices[a])];
    const Vec3& g = e.param_gradients[a];
    Vec3 gx;
    for (int d = 0; d < 3; ++d) gx[d] = g[0] * j.inv[0][d] + g[1] * j.inv[1][d] + g[2] * j.inv[2][d];
    for (int i = 0; i < 3; ++i)
      for (int jj = 0; jj < 3; ++jj) {
        const double v = c[3 * i + jj];
        r.theta[i][jj] += e.values[a] * v;
        for (int k = 0; k < 3; ++k) r.grad[k][i][jj] += gx[k] * v;
      }
  }
  r.vartheta = r.theta;
  for (int i = 0; i < 3; ++i) r.vartheta[i][i] += 1.0;
  r.det = det3(r.vartheta);
  return r;
}

ThetaEval eval_theta_at(const PlasticField& field, const Vec3& t) {
  const NurbsEval e = nurbs_basis(field.patch.basis, t);
  return eval_theta(field, e, jacobian(field.patch, t));
}

}  // namespace

ThetaEval theta_at(const PlasticField& field, const Vec3& t) {
  ThetaEval r = eval_theta_at(field, t);
  if (!(r.det > 0.0)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "plastic distortion is degenerate (det vartheta = %.6g)", r.det);
    throw Error(ErrorCode::DegeneratePlasticity, buf);
  }
  return r;
}

ThetaEval theta_at_point(const PlasticField& field, const Vec3& x) {
  return theta_at(field, inverse_map(field.patch, x));
}

Vec3 burgers_circuit(const PlasticField& field, const std::vector<Vec3>& loop, int q) {
  if (loop.size() < 4) throw Error(ErrorCode::InvalidLoop, "burgers circuit: need at least three segments");
  const Vec3& first = loop.front();
  const Vec3& last = loop.back();
  if (norm({first[0] - last[0], first[1] - last[1], first[2] - last[2]}) > 1e-12)
    throw Error(ErrorCode::InvalidLoop, "burgers circuit: polyline is not closed");
  const GaussRule g = gauss_rule(q);
  const auto& basis = field.patch.basis;
  Vec3 b{0.0, 0.0, 0.0};
  for (std::size_t s = 0; s + 1 < loop.size(); ++s) {
    const Vec3& P = loop[s];
    const Vec3& Q = loop[s + 1];
    const Vec3 dt{Q[0] - P[0], Q[1] - P[1], Q[2] - P[2]};
    std::vector<double> cuts{0.0, 1.0};
    for (int d = 0; d < 3; ++d) {
      if (dt[d] == 0.0) continue;
      for (double k : basis.knots[d].breakpoints()) {
        const double u = (k - P[d]) / dt[d];
        if (u > 0.0 && u < 1.0) cuts.push_back(u);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double u0 = cuts[c], u1 = cuts[c + 1];
      if (!(u1 > u0)) continue;
      for (int k = 0; k < q; ++k) {
        const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * g.points[k];
        const double w = 0.5 * (u1 - u0) * g.weights[k];
        const Vec3 t{P[0] + u * dt[0], P[1] + u * dt[1], P[2] + u * dt[2]};
        const NurbsEval e = nurbs_basis(basis, t);
        const JacobianEval jac = jacobian(field.patch, t);
        const ThetaEval th = eval_theta(field, e, jac);
        Vec3 dx{0.0, 0.0, 0.0};
        for (int i = 0; i < 3; ++i)
          for (int m = 0; m < 3; ++m) dx[i] += jac.J[i][m] * dt[m];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) b[i] += w * th.theta[i][j] * dx[j];
      }
    }
  }
  return b;
}

std::vector<Vec3> square_loop(const Patch& patch, double cx, double cy, double h, double z) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "square loop: half-width must be positive");
  const Vec3 corners[5] = {{cx - h, cy - h, z}, {cx + h, cy - h, z}, {cx + h, cy + h, z},
                           {cx - h, cy + h, z}, {cx - h, cy - h, z}};
  std::vector<Vec3> out;
  for (const auto& c : corners) out.push_back(inverse_map(patch, c));
  out.back() = out.front();
  return out;
}

ResidualReport residual_norms(const PlasticField& field, const TorsionField& torsion) {
  const Patch& patch = field.patch;
  QuadratureSweep sweep(patch, default_quadrature_order(patch));
  double c2 = 0.0, div2 = 0.0, th2 = 0.0, t2 = 0.0;
  sweep.for_each_span([&](const SweepSpan& span) {
    for (const SweepPoint& pt : span.points) {
      Mat3 theta{};
      Mat3 grad[3]{};
      for (std::size_t a = 0; a < span.indices.size(); ++a) {
        const double* c = &field.theta[9 * static_cast<std::size_t>(span.indices[a])];
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            theta[i][j] += pt.N[a] * c[3 * i + j];
            for (int k = 0; k < 3; ++k) grad[k][i][j] += pt.grad[a][k] * c[3 * i + j];
          }
      }
      const TwoForm t = torsion.at(pt.x);
      TwoForm c{};
      for (int i = 0; i < 3; ++i) {
        // dual coefficient of d Theta^i is curl Theta^i
        const Vec3 curl{grad[1][i][2] - grad[2][i][1], grad[2][i][0] - grad[0][i][2],
                        grad[0][i][1] - grad[1][i][0]};
        for (int m = 0; m < 3; ++m) c[i][m] = t[i][m] - curl[m];
        const double div = grad[0][i][0] + grad[1][i][1] + grad[2][i][2];
        div2 += pt.weight * div * div;
      }
      c2 += pt.weight * form_inner_product(VectorForm::two_form(c), VectorForm::two_form(c));
      th2 += pt.weight * form_inner_product(VectorForm::one_form(theta), VectorForm::one_form(theta));
      t2 += pt.weight * form_inner_product(VectorForm::two_form(t), VectorForm::two_form(t));
    }
  });
  ResidualReport r;
  r.structure_residual = std::sqrt(c2);
  r.divergence_residual = std::sqrt(div2);
  r.theta_norm = std::sqrt(th2);
  r.torsion_norm = std::sqrt(t2);
  return r;
}

namespace {

void write_doubles(std::ostream& os, const char* key, const std::vector<double>& v) {
  os << key << ' ' << v.size();
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, " %.17g", x);
    os << buf;
  }
  os << '\n';
}

std::vector<double> read_doubles(std::istream& is, const std::string& key) {
  std::string k;
  std::size_t n = 0;
  if (!(is >> k >> n) || k != key) throw Error(ErrorCode::Io, "plastic field file: expected '" + key + "'");
  std::vector<double> v(n);
  for (auto& x : v)
    if (!(is >> x)) throw Error(ErrorCode::Io, "plastic field file: truncated '" + key + "'");
  return v;
}

}  // namespace

void save_plastic_field(const PlasticField& field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  const auto& b = field.patch.basis;
  const auto c = b.counts();
  os << "dislocgeo-plastic-field 1\n";
  os << "counts " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  os << "degrees " << b.knots[0].degree << ' ' << b.knots[1].degree << ' ' << b.knots[2].degree << '\n';
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(field.spec_hash));
  os << "spec_hash " << hash << '\n';
  write_doubles(os, "knots0", b.knots[0].values);
  write_doubles(os, "knots1", b.knots[1].values);
  write_doubles(os, "knots2", b.knots[2].values);
  write_doubles(os, "weights", b.weights());
  std::vector<double> cps;
  cps.reserve(field.patch.control_points.size() * 3);
  for (const auto& p : field.patch.control_points) cps.insert(cps.end(), p.begin(), p.end());
  write_doubles(os, "control_points", cps);
  write_doubles(os, "theta", field.theta);
  write_doubles(os, "lambda", field.lambda);
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path);
}

PlasticField load_plastic_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string magic, key;
  int version = 0;
  if (!(is >> magic >> version) || magic != "dislocgeo-plastic-field" || version != 1)
    throw Error(ErrorCode::Io, "not a plastic field file: " + path);
  std::array<int, 3> c{}, p{};
  std::string hash;
  if (!(is >> key >> c[0] >> c[1] >> c[2]) || key != "counts") throw Error(ErrorCode::Io, "plastic field file: bad counts");
  if (!(is >> key >> p[0] >> p[1] >> p[2]) || key != "degrees") throw Error(ErrorCode::Io, "plastic field file: bad degrees");
  if (!(is >> key >> hash) || key != "spec_hash") throw Error(ErrorCode::Io, "plastic field file: bad spec hash");
  std::array<KnotVector, 3> kv;
  for (int d = 0; d < 3; ++d) kv[d] = KnotVector(read_doubles(is, "knots" + std::to_string(d)), p[d]);
  auto w = read_doubles(is, "weights");
  TensorBasis3D basis(kv, std::move(w));
  basis.validate();
  if (basis.counts() != c) throw Error(ErrorCode::Io, "plastic field file: counts do not match knots");
  auto cps = read_doubles(is, "control_points");
  if (cps.size() != 3 * static_cast<std::size_t>(basis.size()))
    throw Error(ErrorCode::Io, "plastic field file: control point count mismatch");
  std::vector<Vec3> pts(basis.size());
  for (std::size_t a = 0; a < pts.size(); ++a) pts[a] = {cps[3 * a], cps[3 * a + 1], cps[3 * a + 2]};
  PlasticField f;
  f.patch = Patch(basis, std::move(pts));
  f.theta = read_doubles(is, "theta");
  f.lambda = read_doubles(is, "lambda");
  if (f.theta.size() != 9 * static_cast<std::size_t>(basis.size()) ||
      f.lambda.size() != 3 * static_cast<std::size_t>(basis.size()))
    throw Error(ErrorCode::Io, "plastic field file: coefficient count mismatch");
  f.spec_hash = std::stoull(hash, nullptr, 16);
  return f;
}

}  // namespace dislocgeo
