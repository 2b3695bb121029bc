#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace dislocgeo {

/// Symmetric sparse matrix in block compressed-sparse-row layout. Blocks are
/// bs x bs and stored row-major; both triangles are stored.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  SparseSymMatrix(int block_rows, int block_size, std::vector<std::int64_t> row_ptr,
                  std::vector<int> cols);

  static SparseSymMatrix from_dense(const std::vector<std::vector<double>>& a);

  /// Pattern of a tensor-product spline space: block (alpha, beta) is present
  /// when the multi-indices differ by at most `band` per direction.
  static SparseSymMatrix tensor_pattern(const std::array<int, 3>& counts,
                                        const std::array<int, 3>& band, int block_size);

  int size() const { return nb_ * bs_; }
  int block_rows() const { return nb_; }
  int block_size() const { return bs_; }
  std::size_t nnz() const { return vals_.size(); }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  std::vector<double>& values() { return vals_; }
  const std::vector<double>& values() const { return vals_; }

  /// Block position of (brow, bcol) or -1 when outside the pattern.
  std::int64_t find_block(int brow, int bcol) const;
  double* block(std::int64_t pos) { return vals_.data() + pos * bs_ * bs_; }
  const double* block(std::int64_t pos) const { return vals_.data() + pos * bs_ * bs_; }

  double get(int r, int c) const;
  void add(int r, int c, double v);
  void set_zero();

  /// y = A x.
  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;
  double max_abs() const;
  /// max |A_ij - A_ji|.
  double asymmetry() const;
  /// Throws InvalidMatrix unless asymmetry() <= rel_tol * max_abs().
  void check_symmetric(double rel_tol = 1e-10) const;

  /// Eliminates the flagged scalar unknowns: zero row and column, unit diagonal.
  void constrain(const std::vector<char>& fixed);

 private:
  int nb_ = 0;
  int bs_ = 1;
  std::vector<std::int64_t> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
};

/// Constant-time block lookup for matrices built by tensor_pattern.
class TensorBlockIndex {
 public:
  TensorBlockIndex(const SparseSymMatrix& m, const std::array<int, 3>& counts,
                   const std::array<int, 3>& band);
  std::int64_t position(int brow, int bcol) const;

 private:
  const SparseSymMatrix* m_;
  std::array<int, 3> n_;
  std::array<int, 3> band_;
};

struct SolverConfig {
  double minres_tol = 1e-5;   // absolute, on ||b - A x||_2
  int minres_max_iter = 200000;
  double pcg_tol = 1e-5;      // relative to ||b||_2
  int pcg_max_iter = 20000;
  double newton_tol = 1e-6;   // relative to the initial residual
  int newton_max_iter = 25;
  int max_backtracks = 8;

  void validate() const;
};

/// Carries the state of an iterative solve that hit its cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorCode::NonConvergence, what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Symmetric positive definite preconditioner M^{-1}.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(const std::vector<double>& r, std::vector<double>& z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void apply(const std::vector<double>& r, std::vector<double>& z) const override { z = r; }
};

/// z_i = r_i / d_i for a positive weight vector d.
class DiagonalPreconditioner final : public Preconditioner {
 public:
  explicit DiagonalPreconditioner(std::vector<double> d);
  void apply(const std::vector<double>& r, std::vector<double>& z) const override;

 private:
  std::vector<double> inv_;
};

/// Jacobi preconditioner 1/diag(A). Throws InvalidMatrix on a zero diagonal.
std::unique_ptr<Preconditioner> jacobi_preconditioner(const SparseSymMatrix& a);

struct SolveResult {
  std::vector<double> x;
  std::vector<double> residuals;  // per iteration, starting with the initial residual
  int iterations = 0;
  double final_residual = 0.0;    // ||b - A x||_2, recomputed explicitly
};

/// MINRES for symmetric (possibly indefinite) systems A x = b. The optional
/// preconditioner must be SPD. Stops when ||b - A x||_2 < tol.
SolveResult minres_solve(const SparseSymMatrix& a, const std::vector<double>& b, double tol,
                         int max_iter, const Preconditioner* m = nullptr);

/// Preconditioned conjugate gradients for SPD A. Stops when
/// ||b - A x||_2 <= tol ||b||_2. Throws Indefinite if p^T A p <= 0.
SolveResult pcg_solve(const SparseSymMatrix& a, const std::vector<double>& b,
                      const Preconditioner& m, double tol, int max_iter);

void write_residual_csv(const std::string& path, const std::vector<double>& residuals);

double norm2(const std::vector<double>& v);

}  // namespace dislocgeo
