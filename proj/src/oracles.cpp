#include "oracles.hpp"

#include <algorithm>

#include "patch_geometry.hpp"

namespace dislocgeo {

void VolterraParams::validate() const {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "volterra: mu must be positive");
  if (!(core_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "volterra: core radius must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw Error(ErrorCode::InvalidArgument, "volterra: nu must lie in (-1, 0.5)");
}

double VolterraParams::ds_screw() const { return mu * b / (2.0 * kPi * core_radius); }

double VolterraParams::ds_edge() const { return mu * b / (2.0 * kPi * (1.0 - nu) * core_radius); }

ScrewStress volterra_screw_stress(double x1, double x2, const VolterraParams& p) {
  p.validate();
  const double r2 = x1 * x1 + x2 * x2;
  if (!(r2 > 0.0)) throw Error(ErrorCode::Singularity, "volterra screw field is singular at r = 0");
  const double k = p.mu * p.b / (2.0 * kPi);
  return {-k * x1 / r2, k * x2 / r2};
}

EdgeStress volterra_edge_stress(double x1, double x2, const VolterraParams& p) {
  p.validate();
  const double r2 = x1 * x1 + x2 * x2;
  if (!(r2 > 0.0)) throw Error(ErrorCode::Singularity, "volterra edge field is singular at r = 0");
  const double d = p.mu * p.b / (2.0 * kPi * (1.0 - p.nu));
  const double r4 = r2 * r2;
  EdgeStress s;
  s.s11 = d * x2 * (3.0 * x1 * x1 + x2 * x2) / r4;
  s.s22 = -d * x2 * (x1 * x1 - x2 * x2) / r4;
  s.s12 = -d * x1 * (x1 * x1 - x2 * x2) / r4;
  s.s33 = p.nu * (s.s11 + s.s22);
  return s;
}

namespace {

Mat3 integrand(const TorsionField& torsion, const Vec3& x0, const Vec3& d, double t) {
  const Vec3 p{x0[0] + t * d[0], x0[1] + t * d[1], x0[2] + t * d[2]};
  const TwoForm c = torsion.at(p);
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    out[i][0] = t * (c[i][1] * d[2] - c[i][2] * d[1]);
    out[i][1] = t * (c[i][2] * d[0] - c[i][0] * d[2]);
    out[i][2] = t * (c[i][0] * d[1] - c[i][1] * d[0]);
  }
  return out;
}

Mat3 gauss_piece(const TorsionField& torsion, const Vec3& x0, const Vec3& d, double a, double b, int pieces,
                 const GaussRule& g) {
  Mat3 s{};
  const double h = (b - a) / pieces;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + k * h;
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const double t = lo + 0.5 * h * (g.points[q] + 1.0);
      const Mat3 v = integrand(torsion, x0, d, t);
      const double w = 0.5 * h * g.weights[q];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s[i][j] += w * v[i][j];
    }
  }
  return s;
}

// Parameters in (0, 1) where the distance from x0 + t d to a line crosses the
// core radius or reaches its minimum.
void add_breaks(const DislocationSpec& s, const Vec3& x0, const Vec3& d, std::vector<double>& t) {
  const double nn = norm(s.line_direction);
  const Vec3 n{s.line_direction[0] / nn, s.line_direction[1] / nn, s.line_direction[2] / nn};
  Vec3 a{x0[0] - s.center[0], x0[1] - s.center[1], x0[2] - s.center[2]};
  const double an = dot(a, n), dn = dot(d, n);
  Vec3 ap, dp;
  for (int k = 0; k < 3; ++k) {
    ap[k] = a[k] - an * n[k];
    dp[k] = d[k] - dn * n[k];
  }
  const double A = dot(dp, dp), B = 2.0 * dot(ap, dp), C = dot(ap, ap) - s.core_radius * s.core_radius;
  if (A <= 0.0) return;
  t.push_back(-B / (2.0 * A));
  const double disc = B * B - 4.0 * A * C;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    t.push_back((-B - sq) / (2.0 * A));
    t.push_back((-B + sq) / (2.0 * A));
  }
}

}  // namespace

Mat3 homotopy_theta(const TorsionField& torsion, const Vec3& x, const Vec3& x0, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "homotopy: tolerance must be positive");
  const Vec3 d{x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]};
  std::vector<double> cuts{0.0, 1.0};
  for (const auto& s : torsion.specs()) add_breaks(s, x0, d, cuts);
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [](double t) { return !(t >= 0.0 && t <= 1.0); }),
             cuts.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const GaussRule g = gauss_rule(8);
  Mat3 total{};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    Mat3 prev = gauss_piece(torsion, x0, d, a, b, 1, g);
    bool done = false;
    for (int pieces = 2; pieces <= 4096; pieces *= 2) {
      const Mat3 cur = gauss_piece(torsion, x0, d, a, b, pieces, g);
      double diff = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) diff = std::max(diff, std::abs(cur[i][j] - prev[i][j]));
      prev = cur;
      if (diff <= tol) {
        done = true;
        break;
      }
    }
    if (!done) throw Error(ErrorCode::NonConvergence, "homotopy: quadrature did not converge");
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) total[i][j] += prev[i][j];
  }
  return total;
}

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "fd_gradient: step must be positive");
  std::vector<double> g(x.size());
  std::vector<double> p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = x[i] + step;
    const double fp = f(p);
    p[i] = x[i] - step;
    const double fm = f(p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace dislocgeo
