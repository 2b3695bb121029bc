#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "elastic_solver.hpp"

using namespace dislocgeo;

namespace {

Patch small_patch(int n = 4, int p = 2, Vec3 ext = {2.0, 3.0, 1.5}) {
  auto kv = make_graded_knot_vector(n, p);
  return make_box_patch(TensorBasis3D({kv, kv, kv}), ext);
}

PlasticField random_plastic(const Patch& patch, double amp, unsigned seed) {
  PlasticField f = PlasticField::zero(patch);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  for (auto& v : f.theta) v = u(rng);
  return f;
}

ElasticState perturbed(const Patch& patch, double amp, unsigned seed) {
  ElasticState s = ElasticState::identity(patch);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  for (auto& v : s.y) v += u(rng);
  return s;
}

Mat3 rotation(double a, double b) {
  const Mat3 rz{{{std::cos(a), -std::sin(a), 0}, {std::sin(a), std::cos(a), 0}, {0, 0, 1}}};
  const Mat3 rx{{{1, 0, 0}, {0, std::cos(b), -std::sin(b)}, {0, std::sin(b), std::cos(b)}}};
  return matmul(rz, rx);
}

}  // namespace

TEST_CASE("material validation and lame constant") {
  Material m;
  CHECK(m.lame_lambda() == doctest::Approx(0.6 / 0.4));
  m.nu = 0.5;
  CHECK_THROWS_AS(m.validate(), Error);
  m.nu = 0.3;
  m.mu = 0.0;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("svk stress matches the full elasticity tensor") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Material m{1.3, 0.27};
  for (int trial = 0; trial < 5; ++trial) {
    Mat3 v = identity3(), e{};
    for (auto& r : v)
      for (auto& x : r) x += u(rng);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) e[i][j] = e[j][i] = u(rng);
    const Mat3 g = matmul(transpose(v), v);
    const Mat3 gi = inverse3(g, det3(g));
    const Mat3 a = svk_stress(gi, e, m);
    const Mat3 b = second_pk_stress(elastic_coefficients(gi, m), e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a[i][j] == doctest::Approx(b[i][j]).epsilon(1e-12));
    const Tensor4 c = elastic_coefficients(gi, m);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            const double x = c[27 * i + 9 * j + 3 * k + l];
            CHECK(x == doctest::Approx(c[27 * j + 9 * i + 3 * k + l]));
            CHECK(x == doctest::Approx(c[27 * k + 9 * l + 3 * i + j]));
          }
  }
}

TEST_CASE("green strain vanishes for rotated plastic distortion") {
  Mat3 v{{{1.1, 0.05, -0.02}, {0.03, 0.95, 0.1}, {0.0, -0.04, 1.02}}};
  const Mat3 f = matmul(rotation(0.7, -0.4), v);
  const Mat3 e = green_strain(f, v);
  for (const auto& r : e)
    for (double x : r) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("residual is the energy gradient") {
  const Patch patch = small_patch();
  const PlasticField pf = random_plastic(patch, 0.05, 11);
  ElasticProblem p{&pf, Material{1.0, 0.3}, {}, ElasticPreconditioner::Jacobi};
  const ElasticState s = perturbed(patch, 0.05, 12);
  const auto f = residual_vector(p, s);
  const double h = 1e-6;
  for (std::size_t i = 0; i < s.y.size(); i += 7) {
    ElasticState a = s, b = s;
    a.y[i] += h;
    b.y[i] -= h;
    const double fd = (strain_energy(p, a) - strain_energy(p, b)) / (2 * h);
    CHECK(f[i] == doctest::Approx(fd).epsilon(1e-6).scale(1e-3));
  }
}

TEST_CASE("tangent is the residual derivative and symmetric") {
  const Patch patch = small_patch(4, 2);
  const PlasticField pf = random_plastic(patch, 0.05, 21);
  ElasticProblem p{&pf, Material{0.8, 0.25}, {}, ElasticPreconditioner::Jacobi};
  const ElasticState s = perturbed(patch, 0.05, 22);
  const SparseSymMatrix k = tangent_matrix(p, s);
  CHECK(k.asymmetry() <= 1e-12 * k.max_abs());
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t j = 0; j < s.y.size(); j += 5) {
    ElasticState a = s, b = s;
    a.y[j] += h;
    b.y[j] -= h;
    const auto fa = residual_vector(p, a), fb = residual_vector(p, b);
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double fd = (fa[i] - fb[i]) / (2 * h);
      worst = std::max(worst, std::abs(fd - k.get(static_cast<int>(i), static_cast<int>(j))));
    }
  }
  CHECK(worst < 1e-6 * k.max_abs());
}

TEST_CASE("energy and residual norm are objective") {
  const Patch patch = small_patch();
  const PlasticField pf = random_plastic(patch, 0.05, 31);
  ElasticProblem p{&pf, Material{}, {}, ElasticPreconditioner::Jacobi};
  const ElasticState s = perturbed(patch, 0.05, 32);
  ElasticState r = s;
  const Mat3 q = rotation(0.9, 0.3);
  for (std::size_t a = 0; a < s.y.size() / 3; ++a)
    for (int i = 0; i < 3; ++i)
      r.y[3 * a + i] = q[i][0] * s.y[3 * a] + q[i][1] * s.y[3 * a + 1] + q[i][2] * s.y[3 * a + 2] + 0.5 * i;
  CHECK(strain_energy(p, r) == doctest::Approx(strain_energy(p, s)).epsilon(1e-12));
  CHECK(norm2(residual_vector(p, r)) == doctest::Approx(norm2(residual_vector(p, s))).epsilon(1e-10));
}

TEST_CASE("zero plasticity gives the identity in one step") {
  for (auto prec : {ElasticPreconditioner::TensorLaplace, ElasticPreconditioner::Jacobi}) {
    const Patch patch = small_patch(6, 2, {4.0, 4.0, 2.0});
    const PlasticField pf = PlasticField::zero(patch);
    ElasticProblem p{&pf, Material{}, corner_pinning(patch), prec};
    const NewtonResult r = newton_solve(p, SolverConfig{});
    CHECK(r.iterations == 1);
    const ElasticState id = ElasticState::identity(patch);
    CHECK(r.state.y == id.y);
    CHECK(r.initial_residual == 0.0);
    CHECK(strain_energy(p, r.state) == 0.0);
  }
}

TEST_CASE("uniform plastic distortion relaxes to a stress-free state") {
  const Patch patch = small_patch(5, 2, {3.0, 3.0, 3.0});
  PlasticField pf = PlasticField::zero(patch);
  const Mat3 a{{{0.02, 0.01, 0.0}, {-0.01, 0.0, 0.015}, {0.005, 0.0, -0.01}}};
  for (int b = 0; b < patch.basis.size(); ++b)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) pf.coeff(b, i, j) = a[i][j];
  for (auto prec : {ElasticPreconditioner::TensorLaplace, ElasticPreconditioner::Jacobi}) {
    ElasticProblem p{&pf, Material{}, corner_pinning(patch), prec};
    const NewtonResult r = newton_solve(p, SolverConfig{});
    CHECK(r.iterations >= 1);
    CHECK(r.history.front().energy > 0.0);
    CHECK(strain_energy(p, r.state) < 1e-10 * r.history.front().energy);
    const StressEval st = stress_at(p, r.state, {0.3, 0.6, 0.2});
    for (const auto& row : st.S)
      for (double x : row) CHECK(std::abs(x) < 1e-6);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k].residual <= r.history[k - 1].residual);
  }
}

TEST_CASE("pinning removes rigid motions") {
  const Patch patch = small_patch(4, 2);
  const PlasticField pf = random_plastic(patch, 0.03, 41);
  ElasticProblem p{&pf, Material{}, corner_pinning(patch), ElasticPreconditioner::Jacobi};
  CHECK(p.boundary.pinned.size() == 6);
  SparseSymMatrix k = tangent_matrix(p, ElasticState::identity(patch));
  std::vector<char> fixed(k.size(), 0);
  for (int d : p.boundary.pinned) fixed[d] = 1;
  k.constrain(fixed);
  std::vector<double> b(k.size(), 1.0);
  for (int d : p.boundary.pinned) b[d] = 0.0;
  auto jac = jacobi_preconditioner(k);
  CHECK_NOTHROW(pcg_solve(k, b, *jac, 1e-10, 5000));
}

TEST_CASE("cauchy stress is symmetric") {
  const Patch patch = small_patch();
  const PlasticField pf = random_plastic(patch, 0.05, 51);
  ElasticProblem p{&pf, Material{}, {}, ElasticPreconditioner::Jacobi};
  const ElasticState s = perturbed(patch, 0.05, 52);
  const StressEval e = stress_at(p, s, {0.4, 0.5, 0.6});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(e.cauchy[i][j] == doctest::Approx(e.cauchy[j][i]).epsilon(1e-12));
}

TEST_CASE("inverted configurations are rejected") {
  const Patch patch = small_patch();
  const PlasticField pf = PlasticField::zero(patch);
  ElasticProblem p{&pf, Material{}, {}, ElasticPreconditioner::Jacobi};
  ElasticState s = ElasticState::identity(patch);
  for (std::size_t a = 0; a < s.y.size() / 3; ++a) s.y[3 * a] = -s.y[3 * a];
  try {
    residual_vector(p, s);
    FAIL("expected InvertedElement");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvertedElement);
  }
  ElasticProblem none{nullptr, Material{}, {}, ElasticPreconditioner::Jacobi};
  CHECK_THROWS_AS(strain_energy(none, s), Error);
}

TEST_CASE("state files round trip") {
  const Patch patch = small_patch();
  const ElasticState s = perturbed(patch, 0.1, 61);
  const std::string path = "elastic_state_roundtrip.txt";
  save_elastic_state(s, path);
  const ElasticState r = load_elastic_state(path, s.y.size());
  CHECK(r.y == s.y);
  CHECK_THROWS_AS(load_elastic_state(path, s.y.size() + 3), Error);
  CHECK_THROWS_AS(load_elastic_state("no_such_file.txt", 3), Error);
  std::remove(path.c_str());

  write_newton_history_csv("history.csv", {{0, 1.0, 2.0, 0, 0.0, true}, {1, 0.1, 1.5, 12, 1.0, false}});
  std::ifstream f("history.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "iteration,residual,energy,pcg_iterations,step,full_tangent");
  std::remove("history.csv");
}
