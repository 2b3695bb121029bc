#pragma once

#include <array>
#include <string>
#include <vector>

#include "dislocation_fields.hpp"
#include "patch_geometry.hpp"
#include "sparse_linalg.hpp"

namespace dislocgeo {

/// Spline coefficients of the plastic distortion Theta and the multiplier.
/// theta[9 a + 3 i + j] = (Theta_a)^i_j, lambda[3 a + i] = lambda_a^i.
struct PlasticField {
  Patch patch;
  std::vector<double> theta;
  std::vector<double> lambda;
  std::uint64_t spec_hash = 0;

  static PlasticField zero(const Patch& patch);
  double& coeff(int a, int i, int j) { return theta[9 * a + 3 * i + j]; }
  double coeff(int a, int i, int j) const { return theta[9 * a + 3 * i + j]; }
};

struct ResidualReport {
  double structure_residual = 0.0;   // ||tau - d Theta||_L2
  double divergence_residual = 0.0;  // ||delta Theta||_L2
  double minres_residual = 0.0;      // worst terminal algebraic residual over i
  double theta_norm = 0.0;           // ||Theta||_L2
  double torsion_norm = 0.0;         // ||tau||_L2
  int minres_iterations = 0;         // summed over the component solves
};

/// Unknowns are interleaved per basis function: dof 4 a + j, j < 3 for
/// (Theta_a)^i_j and j = 3 for lambda_a^i. The matrix does not depend on i.
struct PlasticSystem {
  SparseSymMatrix matrix;
  std::array<std::vector<double>, 3> rhs;
  std::vector<double> vector_laplacian_diag;  // int |grad N_a|^2, one per basis
  std::vector<double> mass_diag;              // int N_a^2, one per basis
  std::vector<char> fixed;                    // eliminated dofs after apply_normal_bc
};

PlasticSystem assemble_plastic_system(const Patch& patch, const TorsionField& torsion);

/// Strong boundary condition Theta^i_j n^j = 0: on a face with normal e_j the
/// coefficients (Theta_a)^i_j of the face functions are eliminated.
void apply_normal_bc(PlasticSystem& system, const Patch& patch);

enum class PlasticPreconditioner {
  None,
  /// Diagonal of the vector Laplacian on Theta, diagonal of the mass matrix on lambda.
  Diagonal,
  /// Same blocks inverted exactly by fast diagonalization (box patches only).
  Tensor,
};

struct PlasticOptions {
  PlasticPreconditioner preconditioner = PlasticPreconditioner::Tensor;
  /// Fix one multiplier coefficient to remove the constant null mode.
  bool pin_lambda = true;
};

struct PlasticSolution {
  PlasticField field;
  ResidualReport report;
  std::array<std::vector<double>, 3> histories;  // MINRES residuals per i
};

PlasticSolution solve_plastic(const Patch& patch, const TorsionField& torsion, const SolverConfig& config,
                              const PlasticOptions& options = {});

struct ThetaEval {
  Mat3 theta{};     // Theta^i_j
  Mat3 vartheta{};  // delta + Theta
  double det = 1.0;
  Mat3 grad[3]{};   // grad[k][i][j] = d Theta^i_j / d x^k
};

/// Throws DegeneratePlasticity when det vartheta <= 0.
ThetaEval theta_at(const PlasticField& field, const Vec3& t);
ThetaEval theta_at_point(const PlasticField& field, const Vec3& x);

/// Line integral of Theta along a closed polyline of parameter points. Each
/// segment is split at knot planes and integrated with q Gauss points.
Vec3 burgers_circuit(const PlasticField& field, const std::vector<Vec3>& loop, int q = 6);

/// Axis-aligned square loop of half-width h around (cx, cy) at height z,
/// counter-clockwise in the x1-x2 plane, returned in parameter coordinates.
std::vector<Vec3> square_loop(const Patch& patch, double cx, double cy, double h, double z);

ResidualReport residual_norms(const PlasticField& field, const TorsionField& torsion);

/// Text dump: header with grid, degrees, knots, control points and dislocation hash,
/// then the coefficient table.
void save_plastic_field(const PlasticField& field, const std::string& path);
PlasticField load_plastic_field(const std::string& path);

/// Hash identifying a list of dislocations.
std::uint64_t torsion_hash(const TorsionField& torsion);

}  // namespace dislocgeo
