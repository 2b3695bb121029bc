#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"

using namespace dislocgeo;

namespace {

// Enclosed fraction of the unit-normalized linear-taper density within radius r.
double enclosed(double r, double R) {
  const double x = std::min(r, R);
  return 6.0 / (R * R) * (x * x / 2.0 - x * x * x / (3.0 * R));
}

}  // namespace

TEST_CASE("screw field special values") {
  VolterraParams p{1.3, 0.3, 0.7, 1.5};
  const ScrewStress a = volterra_screw_stress(p.core_radius, 0.0, p);
  CHECK(std::abs(a.s23) == doctest::Approx(p.ds_screw()));
  CHECK(a.s23 < 0.0);
  CHECK(a.s31 == 0.0);
  CHECK(volterra_screw_stress(0.0, p.core_radius, p).s23 == 0.0);
  for (double phi : {0.1, 1.0, 2.5}) {
    const double r = 2.0;
    const ScrewStress s1 = volterra_screw_stress(r * std::cos(phi), r * std::sin(phi), p);
    const ScrewStress s2 = volterra_screw_stress(2 * r * std::cos(phi), 2 * r * std::sin(phi), p);
    CHECK(s2.s23 == doctest::Approx(s1.s23 / 2));
    CHECK(s2.s31 == doctest::Approx(s1.s31 / 2));
  }
  try {
    volterra_screw_stress(0.0, 0.0, p);
    FAIL("expected Singularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singularity);
  }
}

TEST_CASE("edge field special values") {
  VolterraParams p{1.0, 0.3, 1.0, 1.0};
  const EdgeStress s = volterra_edge_stress(0.0, p.core_radius, p);
  CHECK(s.s12 == 0.0);
  CHECK(std::abs(s.s11) == doctest::Approx(p.ds_edge()));
  CHECK(std::abs(s.s22) == doctest::Approx(p.ds_edge()));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 20; ++k) {
    const EdgeStress e = volterra_edge_stress(u(rng), u(rng), p);
    CHECK(e.s33 == doctest::Approx(p.nu * (e.s11 + e.s22)));
  }
  CHECK_THROWS_AS(volterra_edge_stress(0.0, 0.0, p), Error);
  CHECK(p.ds_edge() == doctest::Approx(p.ds_screw() / 0.7));
}

TEST_CASE("volterra fields are in equilibrium") {
  VolterraParams p{1.0, 0.3, 1.0, 1.0};
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-8, 8);
  const double h = 1e-5;
  int checked = 0;
  while (checked < 50) {
    const double x = u(rng), y = u(rng);
    const double r = std::hypot(x, y);
    if (r < 0.5) continue;
    ++checked;
    const auto e1p = volterra_edge_stress(x + h, y, p), e1m = volterra_edge_stress(x - h, y, p);
    const auto e2p = volterra_edge_stress(x, y + h, p), e2m = volterra_edge_stress(x, y - h, p);
    const double scale = p.ds_edge() / (r * r);
    CHECK(std::abs((e1p.s11 - e1m.s11 + e2p.s12 - e2m.s12) / (2 * h)) <= 1e-4 * scale);
    CHECK(std::abs((e1p.s12 - e1m.s12 + e2p.s22 - e2m.s22) / (2 * h)) <= 1e-4 * scale);
    const auto s1p = volterra_screw_stress(x + h, y, p), s1m = volterra_screw_stress(x - h, y, p);
    const auto s2p = volterra_screw_stress(x, y + h, p), s2m = volterra_screw_stress(x, y - h, p);
    CHECK(std::abs((s1p.s31 - s1m.s31 + s2p.s23 - s2m.s23) / (2 * h)) <= 1e-4 * p.ds_screw() / (r * r));
  }
}

TEST_CASE("homotopy of zero torsion vanishes") {
  TorsionField t(DislocationSpec::screw(0.0));
  const Mat3 h = homotopy_theta(t, {1.0, 2.0, 0.5}, {0, 0, 0});
  for (const auto& r : h)
    for (double v : r) CHECK(v == 0.0);
}

TEST_CASE("homotopy matches the radial profile on the axes") {
  TorsionField screw(DislocationSpec::screw(1.0));
  TorsionField edge(DislocationSpec::edge(1.0));
  for (double x : {0.1, 0.4, 0.75, 1.0, 1.3, 3.0, 12.0}) {
    const double expect = enclosed(x, 1.0) / (2.0 * kPi * x);
    const Mat3 s = homotopy_theta(screw, {x, 0, 0}, {0, 0, 0});
    CHECK(s[2][1] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(std::abs(s[2][0]) < 1e-14);
    const Mat3 e = homotopy_theta(edge, {0, x, 0}, {0, 0, 0});
    CHECK(e[0][0] == doctest::Approx(-expect).epsilon(1e-10));
    CHECK(std::abs(e[0][1]) < 1e-14);
  }
}

TEST_CASE("homotopy primitive is closed against the torsion") {
  DislocationSpec s = DislocationSpec::edge(1.0);
  const double ln = std::sqrt(0.2 * 0.2 + 0.1 * 0.1 + 1.0);
  s.line_direction = {0.2 / ln, -0.1 / ln, 1.0 / ln};
  s.burgers = {0.6, 0.3, -0.2};
  TorsionField t(s);
  const Vec3 x0{0.05, -0.02, 0.1};
  const double h = 1e-4;
  for (const Vec3& x : {Vec3{0.3, 0.2, 0.4}, Vec3{-0.5, 0.1, -0.3}, Vec3{2.0, 1.5, 0.2}, Vec3{-3.0, 0.5, 1.0}}) {
    // curl of row i reproduces the dual torsion coefficients
    Mat3 d[3];
    for (int k = 0; k < 3; ++k) {
      Vec3 p = x, m = x;
      p[k] += h;
      m[k] -= h;
      const Mat3 hp = homotopy_theta(t, p, x0, 1e-12), hm = homotopy_theta(t, m, x0, 1e-12);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d[k][i][j] = (hp[i][j] - hm[i][j]) / (2 * h);
    }
    const TwoForm c = t.at(x);
    for (int i = 0; i < 3; ++i) {
      const double curl[3] = {d[1][i][2] - d[2][i][1], d[2][i][0] - d[0][i][2], d[0][i][1] - d[1][i][0]};
      for (int m = 0; m < 3; ++m) CHECK(curl[m] == doctest::Approx(c[i][m]).epsilon(1e-4).scale(1e-4));
    }
  }
}

TEST_CASE("homotopy is linear in the burgers vector") {
  TorsionField a(DislocationSpec::edge(1.0)), b(DislocationSpec::edge(-2.5));
  const Mat3 ha = homotopy_theta(a, {0.7, -1.2, 0.3}, {0, 0, 0});
  const Mat3 hb = homotopy_theta(b, {0.7, -1.2, 0.3}, {0, 0, 0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(hb[i][j] == doctest::Approx(-2.5 * ha[i][j]).epsilon(1e-12));
}

TEST_CASE("finite difference gradient") {
  auto sq = [](const std::vector<double>& x) { return x[0] * x[0]; };
  CHECK(std::abs(fd_gradient(sq, {1.0}, 1e-5)[0] - 2.0) < 1e-9);
  auto quad = [](const std::vector<double>& x) { return 3 * x[0] * x[0] + 2 * x[0] * x[1] - x[1] * x[1] + x[0]; };
  const auto g = fd_gradient(quad, {0.5, -1.5}, 1e-3);
  CHECK(g[0] == doctest::Approx(6 * 0.5 + 2 * -1.5 + 1).epsilon(1e-10));
  CHECK(g[1] == doctest::Approx(2 * 0.5 - 2 * -1.5).epsilon(1e-10));
  CHECK_THROWS_AS(fd_gradient(sq, {1.0}, 0.0), Error);
}
