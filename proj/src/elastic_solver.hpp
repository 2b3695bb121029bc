#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "plastic_solver.hpp"
#include "sparse_linalg.hpp"

namespace dislocgeo {

struct Material {
  double mu = 1.0;
  double nu = 0.3;

  /// Throws InvalidArgument unless mu > 0 and -1 < nu < 0.5 (nu == 0.5 is
  /// reported as the incompressible limit).
  void validate() const;
  /// 2 mu nu / (1 - 2 nu).
  double lame_lambda() const;
};

/// C^{ijkl} stored at 27 i + 9 j + 3 k + l.
using Tensor4 = std::array<double, 81>;

/// E_kl = 1/2 (F^i_k F^i_l - vartheta^i_k vartheta^i_l).
Mat3 green_strain(const Mat3& grad_y, const Mat3& vartheta);

/// C^{ijkl} = lambda' G^{ij} G^{kl} + mu (G^{ik} G^{jl} + G^{il} G^{jk}), G = g^{-1}.
Tensor4 elastic_coefficients(const Mat3& ginv, const Material& m);

/// S^{ij} = C^{ijkl} E_kl.
Mat3 second_pk_stress(const Tensor4& c, const Mat3& e);

/// Same contraction without forming C: lambda' tr(G E) G + 2 mu G E G.
Mat3 svk_stress(const Mat3& ginv, const Mat3& e, const Material& m);

/// Pinned scalar unknowns y[3 a + m] that remove the rigid-body modes.
struct BoundarySpec {
  std::vector<int> pinned;  // scalar dof indices
  std::string description;
};

/// Corner (-,-,-) in all components, (+,-,-) in components 2 and 3,
/// (-,+,-) in component 3. All other faces are traction free.
BoundarySpec corner_pinning(const Patch& patch);

/// Displacement coefficients y[3 a + m] on the patch of the plastic field.
struct ElasticState {
  std::vector<double> y;

  static ElasticState identity(const Patch& patch);
};

enum class ElasticPreconditioner { Jacobi, TensorLaplace };

/// Problem data shared by the evaluation routines.
struct ElasticProblem {
  const PlasticField* plastic = nullptr;
  Material material;
  BoundarySpec boundary;
  ElasticPreconditioner preconditioner = ElasticPreconditioner::TensorLaplace;
};

double strain_energy(const ElasticProblem& p, const ElasticState& s);

/// Galerkin residual f^a_m = int S^{ij} N^a_{,i} F^m_j det(vartheta); pinned rows
/// are zero. Throws InvertedElement if det(grad y) <= 0 at a quadrature point.
std::vector<double> residual_vector(const ElasticProblem& p, const ElasticState& s);

/// Consistent tangent of residual_vector, without boundary elimination. With
/// initial_stress = false the delta_mn (grad N_a . S grad N_b) term is dropped,
/// which leaves the positive semidefinite material part.
SparseSymMatrix tangent_matrix(const ElasticProblem& p, const ElasticState& s, bool initial_stress = true);

struct NewtonRecord {
  int iteration = 0;
  double residual = 0.0;     // ||f||_2 after the step
  double energy = 0.0;
  int pcg_iterations = 0;
  double step = 1.0;         // accepted line-search factor
  bool full_tangent = true;  // false when negative curvature forced the material tangent
};

struct NewtonResult {
  ElasticState state;
  std::vector<NewtonRecord> history;  // history[0] is the initial state
  int iterations = 0;                 // Newton steps taken
  double initial_residual = 0.0;
  double final_residual = 0.0;
};

/// Newton-Raphson from y = x with PCG inner solves and backtracking. A step
/// whose tangent shows negative curvature is recomputed with the material part.
NewtonResult newton_solve(const ElasticProblem& p, const SolverConfig& config);

struct StressEval {
  Mat3 S{};       // second Piola-Kirchhoff
  Mat3 E{};       // Green strain
  Mat3 F{};       // grad y
  Mat3 cauchy{};  // F S F^T det(vartheta) / det F
  double det_vartheta = 1.0;
};

StressEval stress_at(const ElasticProblem& p, const ElasticState& s, const Vec3& t);

void save_elastic_state(const ElasticState& s, const std::string& path);
ElasticState load_elastic_state(const std::string& path, std::size_t expected_size);
void write_newton_history_csv(const std::string& path, const std::vector<NewtonRecord>& h);

}  // namespace dislocgeo
