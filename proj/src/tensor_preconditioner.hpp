#pragma once

#include <array>
#include <vector>

#include "patch_geometry.hpp"
#include "sparse_linalg.hpp"

namespace dislocgeo {

/// One-dimensional spline stiffness and mass matrices of a box patch
/// direction (dense, physical length scaling applied).
struct Spline1DMatrices {
  int n = 0;
  std::vector<double> K;  // int B_i' B_j' dx, row-major n x n
  std::vector<double> M;  // int B_i B_j dx
};

Spline1DMatrices spline_1d_matrices(const KnotVector& kv, double length);

/// Generalized eigenpairs K v = lambda M v of one direction, optionally with
/// the two end functions removed (homogeneous Dirichlet).
struct Pencil1D {
  int n = 0;                    // full basis count
  bool dirichlet = false;
  int m = 0;                    // active count
  std::vector<double> V;        // m x m, columns M-orthonormal
  std::vector<double> lambda;   // m eigenvalues
};

Pencil1D make_pencil(const Spline1DMatrices& mats, bool dirichlet);

/// Exact inverse of sum_d a_d (K_d in slot d, M elsewhere) + s M x M x M on a
/// scalar tensor field, applied by fast diagonalization. Entries removed by a
/// Dirichlet direction are passed through unchanged.
class KroneckerInverse {
 public:
  KroneckerInverse(std::array<const Pencil1D*, 3> p, std::array<double, 3> a, double shift);
  /// z = A^{-1} r on the active entries; strided access into interleaved vectors.
  void apply(const double* r, double* z, int stride) const;

 private:
  std::array<const Pencil1D*, 3> p_;
  std::vector<double> inv_diag_;
};

/// Block-diagonal preconditioner for the plastic saddle system: vector
/// Laplacian per Theta component (Dirichlet across the faces where that
/// component is eliminated), mass matrix on the multiplier.
class PlasticTensorPreconditioner final : public Preconditioner {
 public:
  PlasticTensorPreconditioner(const Patch& patch, std::vector<char> fixed);
  void apply(const std::vector<double>& r, std::vector<double>& z) const override;

 private:
  std::array<std::array<Pencil1D, 2>, 3> pencils_;  // [direction][dirichlet]
  std::vector<KroneckerInverse> blocks_;            // 3 Theta components + lambda
  std::vector<char> fixed_;
  int n_ = 0;
};

/// Per-component anisotropic Laplacian preconditioner for the elastic tangent:
/// mu grad.grad + (lambda' + mu) d_m d_m on component m, with a small mass shift.
class ElasticTensorPreconditioner final : public Preconditioner {
 public:
  ElasticTensorPreconditioner(const Patch& patch, double mu, double lame_lambda, std::vector<char> fixed);
  void apply(const std::vector<double>& r, std::vector<double>& z) const override;

 private:
  std::array<Pencil1D, 3> pencils_;
  std::vector<KroneckerInverse> blocks_;
  std::vector<char> fixed_;
  int n_ = 0;
};

}  // namespace dislocgeo
