#include "sparse_linalg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

namespace dislocgeo {

SparseSymMatrix::SparseSymMatrix(int block_rows, int block_size, std::vector<std::int64_t> row_ptr,
                                 std::vector<int> cols)
    : nb_(block_rows), bs_(block_size), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)) {
  if (nb_ < 0 || bs_ < 1 || static_cast<int>(row_ptr_.size()) != nb_ + 1 ||
      row_ptr_.back() != static_cast<std::int64_t>(cols_.size()))
    throw Error(ErrorCode::InvalidMatrix, "sparse matrix: inconsistent layout");
  for (int r = 0; r < nb_; ++r)
    for (std::int64_t k = row_ptr_[r] + 1; k < row_ptr_[r + 1]; ++k)
      if (cols_[k] <= cols_[k - 1])
        throw Error(ErrorCode::InvalidMatrix, "sparse matrix: columns must be strictly increasing");
  vals_.assign(cols_.size() * static_cast<std::size_t>(bs_ * bs_), 0.0);
}

SparseSymMatrix SparseSymMatrix::from_dense(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::int64_t> rp(n + 1, 0);
  std::vector<int> cols;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(a[i].size()) != n) throw Error(ErrorCode::InvalidMatrix, "from_dense: matrix must be square");
    for (int j = 0; j < n; ++j)
      if (a[i][j] != 0.0 || a[j][i] != 0.0 || i == j) cols.push_back(j);
    rp[i + 1] = static_cast<std::int64_t>(cols.size());
  }
  SparseSymMatrix m(n, 1, std::move(rp), std::move(cols));
  for (int i = 0; i < n; ++i)
    for (std::int64_t k = m.row_ptr_[i]; k < m.row_ptr_[i + 1]; ++k) m.vals_[k] = a[i][m.cols_[k]];
  return m;
}

SparseSymMatrix SparseSymMatrix::tensor_pattern(const std::array<int, 3>& n, const std::array<int, 3>& band,
                                                int block_size) {
  const int total = n[0] * n[1] * n[2];
  std::vector<std::int64_t> rp(static_cast<std::size_t>(total) + 1, 0);
  std::int64_t count = 0;
  for (int i3 = 0; i3 < n[2]; ++i3)
    for (int i2 = 0; i2 < n[1]; ++i2)
      for (int i1 = 0; i1 < n[0]; ++i1) {
        const int a = i1 + n[0] * (i2 + n[1] * i3);
        std::int64_t w = 1;
        const int i[3] = {i1, i2, i3};
        for (int d = 0; d < 3; ++d) w *= std::min(n[d] - 1, i[d] + band[d]) - std::max(0, i[d] - band[d]) + 1;
        count += w;
        rp[a + 1] = count;
      }
  std::vector<int> cols(static_cast<std::size_t>(count));
  std::int64_t k = 0;
  for (int i3 = 0; i3 < n[2]; ++i3)
    for (int i2 = 0; i2 < n[1]; ++i2)
      for (int i1 = 0; i1 < n[0]; ++i1)
        for (int j3 = std::max(0, i3 - band[2]); j3 <= std::min(n[2] - 1, i3 + band[2]); ++j3)
          for (int j2 = std::max(0, i2 - band[1]); j2 <= std::min(n[1] - 1, i2 + band[1]); ++j2)
            for (int j1 = std::max(0, i1 - band[0]); j1 <= std::min(n[0] - 1, i1 + band[0]); ++j1)
              cols[k++] = j1 + n[0] * (j2 + n[1] * j3);
  return SparseSymMatrix(total, block_size, std::move(rp), std::move(cols));
}

std::int64_t SparseSymMatrix::find_block(int brow, int bcol) const {
  if (brow < 0 || brow >= nb_) return -1;
  auto b = cols_.begin() + row_ptr_[brow];
  auto e = cols_.begin() + row_ptr_[brow + 1];
  auto it = std::lower_bound(b, e, bcol);
  if (it == e || *it != bcol) return -1;
  return it - cols_.begin();
}

double SparseSymMatrix::get(int r, int c) const {
  const std::int64_t p = find_block(r / bs_, c / bs_);
  if (p < 0) return 0.0;
  return block(p)[(r % bs_) * bs_ + c % bs_];
}

void SparseSymMatrix::add(int r, int c, double v) {
  const std::int64_t p = find_block(r / bs_, c / bs_);
  if (p < 0) throw Error(ErrorCode::InvalidMatrix, "sparse matrix: entry outside the pattern");
  block(p)[(r % bs_) * bs_ + c % bs_] += v;
}

void SparseSymMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

namespace {

template <int BS>
void multiply_fixed(int nb, const std::int64_t* rp, const int* cols, const double* vals, const double* x,
                    double* y) {
  for (int r = 0; r < nb; ++r) {
    double acc[BS] = {};
    for (std::int64_t k = rp[r]; k < rp[r + 1]; ++k) {
      const double* blk = vals + k * BS * BS;
      const double* xv = x + static_cast<std::int64_t>(cols[k]) * BS;
      for (int a = 0; a < BS; ++a)
        for (int b = 0; b < BS; ++b) acc[a] += blk[a * BS + b] * xv[b];
    }
    for (int a = 0; a < BS; ++a) y[static_cast<std::int64_t>(r) * BS + a] = acc[a];
  }
}

}  // namespace

void SparseSymMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  if (static_cast<int>(x.size()) != size())
    throw Error(ErrorCode::InvalidArgument, "sparse matrix: vector size mismatch");
  y.resize(x.size());
  switch (bs_) {
    case 1: multiply_fixed<1>(nb_, row_ptr_.data(), cols_.data(), vals_.data(), x.data(), y.data()); return;
    case 3: multiply_fixed<3>(nb_, row_ptr_.data(), cols_.data(), vals_.data(), x.data(), y.data()); return;
    case 4: multiply_fixed<4>(nb_, row_ptr_.data(), cols_.data(), vals_.data(), x.data(), y.data()); return;
    default: break;
  }
  const int bs = bs_;
  for (int r = 0; r < nb_; ++r) {
    for (int a = 0; a < bs; ++a) y[r * bs + a] = 0.0;
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double* blk = block(k);
      for (int a = 0; a < bs; ++a)
        for (int b = 0; b < bs; ++b) y[r * bs + a] += blk[a * bs + b] * x[cols_[k] * bs + b];
    }
  }
}

std::vector<double> SparseSymMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(size()), 0.0);
  for (int r = 0; r < nb_; ++r) {
    const std::int64_t p = find_block(r, r);
    if (p < 0) continue;
    for (int a = 0; a < bs_; ++a) d[r * bs_ + a] = block(p)[a * bs_ + a];
  }
  return d;
}

double SparseSymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

double SparseSymMatrix::asymmetry() const {
  double worst = 0.0;
  for (int r = 0; r < nb_; ++r)
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int c = cols_[k];
      if (c < r) continue;
      const std::int64_t t = find_block(c, r);
      const double* a = block(k);
      for (int i = 0; i < bs_; ++i)
        for (int j = 0; j < bs_; ++j) {
          const double other = t < 0 ? 0.0 : block(t)[j * bs_ + i];
          worst = std::max(worst, std::abs(a[i * bs_ + j] - other));
        }
    }
  return worst;
}

void SparseSymMatrix::check_symmetric(double rel_tol) const {
  const double asym = asymmetry();
  const double scale = max_abs();
  if (asym > rel_tol * scale) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "matrix is not symmetric: max |A - A^T| = %.3e, max |A| = %.3e", asym, scale);
    throw Error(ErrorCode::InvalidMatrix, buf);
  }
}

void SparseSymMatrix::constrain(const std::vector<char>& fixed) {
  if (static_cast<int>(fixed.size()) != size())
    throw Error(ErrorCode::InvalidArgument, "constrain: mask size mismatch");
  for (int r = 0; r < nb_; ++r)
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const int c = cols_[k];
      double* blk = block(k);
      for (int a = 0; a < bs_; ++a)
        for (int b = 0; b < bs_; ++b) {
          const int gr = r * bs_ + a, gc = c * bs_ + b;
          if (fixed[gr] || fixed[gc]) blk[a * bs_ + b] = gr == gc ? 1.0 : 0.0;
        }
    }
}

TensorBlockIndex::TensorBlockIndex(const SparseSymMatrix& m, const std::array<int, 3>& counts,
                                   const std::array<int, 3>& band)
    : m_(&m), n_(counts), band_(band) {}

std::int64_t TensorBlockIndex::position(int brow, int bcol) const {
  const int i1 = brow % n_[0], i2 = (brow / n_[0]) % n_[1], i3 = brow / (n_[0] * n_[1]);
  const int j1 = bcol % n_[0], j2 = (bcol / n_[0]) % n_[1], j3 = bcol / (n_[0] * n_[1]);
  const int lo1 = std::max(0, i1 - band_[0]), lo2 = std::max(0, i2 - band_[1]), lo3 = std::max(0, i3 - band_[2]);
  const int w1 = std::min(n_[0] - 1, i1 + band_[0]) - lo1 + 1;
  const int w2 = std::min(n_[1] - 1, i2 + band_[1]) - lo2 + 1;
  return m_->row_ptr()[brow] + (static_cast<std::int64_t>(j3 - lo3) * w2 + (j2 - lo2)) * w1 + (j1 - lo1);
}

void SolverConfig::validate() const {
  auto bad = [](const char* field) {
    throw Error(ErrorCode::Validation, std::string("solver config: ") + field + " must be positive");
  };
  if (!(minres_tol > 0)) bad("minres_tol");
  if (!(pcg_tol > 0)) bad("pcg_tol");
  if (!(newton_tol > 0)) bad("newton_tol");
  if (minres_max_iter <= 0) bad("minres_max_iter");
  if (pcg_max_iter <= 0) bad("pcg_max_iter");
  if (newton_max_iter <= 0) bad("newton_max_iter");
  if (max_backtracks < 0) throw Error(ErrorCode::Validation, "solver config: max_backtracks must be >= 0");
}

DiagonalPreconditioner::DiagonalPreconditioner(std::vector<double> d) : inv_(std::move(d)) {
  for (double& v : inv_) {
    if (v == 0.0 || !std::isfinite(v))
      throw Error(ErrorCode::InvalidMatrix, "diagonal preconditioner: zero or non-finite diagonal entry");
    v = 1.0 / v;
  }
}

void DiagonalPreconditioner::apply(const std::vector<double>& r, std::vector<double>& z) const {
  z.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] * inv_[i];
}

std::unique_ptr<Preconditioner> jacobi_preconditioner(const SparseSymMatrix& a) {
  return std::make_unique<DiagonalPreconditioner>(a.diagonal());
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double explicit_residual(const SparseSymMatrix& a, const std::vector<double>& x, const std::vector<double>& b,
                         std::vector<double>& r) {
  a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r);
}

}  // namespace

// Preconditioned MINRES (Paige & Saunders). The 2-norm residual is carried
// along by the recurrence r <- r - phi A w, with A w built from the Lanczos
// products so no extra matrix-vector product is needed.
SolveResult minres_solve(const SparseSymMatrix& a, const std::vector<double>& b, double tol, int max_iter,
                         const Preconditioner* m) {
  if (!(tol > 0.0) || max_iter <= 0) throw Error(ErrorCode::InvalidArgument, "minres: bad tolerance or cap");
  const std::size_t n = b.size();
  if (static_cast<int>(n) != a.size()) throw Error(ErrorCode::InvalidArgument, "minres: size mismatch");
  IdentityPreconditioner ident;
  const Preconditioner& M = m ? *m : ident;

  SolveResult out;
  out.x.assign(n, 0.0);
  std::vector<double> r1 = b, r2 = b, y, v(n), av(n), w(n, 0.0), w1(n), w2(n, 0.0);
  std::vector<double> aw(n, 0.0), aw1(n), aw2(n, 0.0), rtrue = b, scratch(n);
  M.apply(r1, y);
  double beta1 = dotv(r1, y);
  if (beta1 < 0.0) throw Error(ErrorCode::InvalidMatrix, "minres: preconditioner is not positive definite");
  beta1 = std::sqrt(beta1);
  double rnorm = norm2(b);
  out.residuals.push_back(m ? beta1 : rnorm);
  if (rnorm < tol) {
    out.final_residual = rnorm;
    return out;
  }

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (int itn = 1; itn <= max_iter; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    a.multiply(v, av);
    y = av;
    if (itn >= 2)
      for (std::size_t i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
    const double alfa = dotv(v, y);
    for (std::size_t i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
    std::swap(r1, r2);
    r2 = y;
    M.apply(r2, y);
    oldb = beta;
    double bb = dotv(r2, y);
    if (bb < 0.0) throw Error(ErrorCode::InvalidMatrix, "minres: preconditioner is not positive definite");
    beta = std::sqrt(bb);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const double denom = 1.0 / gamma;
    std::swap(w1, w2);
    std::swap(w2, w);
    std::swap(aw1, aw2);
    std::swap(aw2, aw);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
      aw[i] = (av[i] - oldeps * aw1[i] - delta * aw2[i]) * denom;
      out.x[i] += phi * w[i];
      rtrue[i] -= phi * aw[i];
    }
    rnorm = norm2(rtrue);
    out.residuals.push_back(m ? phibar : rnorm);
    out.iterations = itn;

    const bool exhausted = beta == 0.0;
    if (rnorm < tol || exhausted) {
      // Guard against drift of the recurrence.
      rnorm = explicit_residual(a, out.x, b, scratch);
      if (rnorm < tol) {
        out.final_residual = rnorm;
        return out;
      }
      rtrue = scratch;
      if (exhausted) break;
    }
  }
  out.final_residual = explicit_residual(a, out.x, b, scratch);
  char buf[128];
  std::snprintf(buf, sizeof buf, "minres: no convergence after %d iterations (residual %.3e, tol %.1e)",
                out.iterations, out.final_residual, tol);
  throw ConvergenceError(buf, out.final_residual, out.iterations);
}

SolveResult pcg_solve(const SparseSymMatrix& a, const std::vector<double>& b, const Preconditioner& m, double tol,
                      int max_iter) {
  if (!(tol > 0.0) || max_iter <= 0) throw Error(ErrorCode::InvalidArgument, "pcg: bad tolerance or cap");
  const std::size_t n = b.size();
  if (static_cast<int>(n) != a.size()) throw Error(ErrorCode::InvalidArgument, "pcg: size mismatch");
  SolveResult out;
  out.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  out.residuals.push_back(bnorm);
  if (bnorm == 0.0) return out;

  std::vector<double> r = b, z, p, ap(n);
  m.apply(r, z);
  p = z;
  double rz = dotv(r, z);
  for (int itn = 1; itn <= max_iter; ++itn) {
    a.multiply(p, ap);
    const double pap = dotv(p, ap);
    if (!(pap > 0.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "pcg: matrix is not positive definite (p^T A p = %.3e)", pap);
      throw Error(ErrorCode::Indefinite, buf);
    }
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rn = norm2(r);
    out.residuals.push_back(rn);
    out.iterations = itn;
    if (rn <= tol * bnorm) {
      out.final_residual = rn;
      return out;
    }
    m.apply(r, z);
    const double rz_new = dotv(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  out.final_residual = out.residuals.back();
  char buf[128];
  std::snprintf(buf, sizeof buf, "pcg: no convergence after %d iterations (relative residual %.3e)", max_iter,
                out.final_residual / bnorm);
  throw ConvergenceError(buf, out.final_residual, max_iter);
}

void write_residual_csv(const std::string& path, const std::vector<double>& residuals) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  f << "iteration,residual\n";
  char buf[64];
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, residuals[i]);
    f << buf;
  }
  if (!f) throw Error(ErrorCode::Io, "write failed: " + path);
}

}  // namespace dislocgeo
