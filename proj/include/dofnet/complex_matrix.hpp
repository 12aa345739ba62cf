// Dense complex matrices plus the three numeric kernels everything else
// leans on: numerical rank, square solves, and one-dimensional left null
// vectors of tall (n+1) x n matrices.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "dofnet/errors.hpp"

namespace dofnet {

using cd = std::complex<double>;

class ComplexMatrix {
public:
  ComplexMatrix() : rows_(0), cols_(0) {}
  ComplexMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

  static ComplexMatrix identity(size_t n) {
    ComplexMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  cd& operator()(size_t i, size_t j) { return a_[i * cols_ + j]; }
  const cd& operator()(size_t i, size_t j) const { return a_[i * cols_ + j]; }

  bool all_finite() const {
    for (const cd& v : a_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (const cd& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  std::vector<cd> matvec(const std::vector<cd>& x) const {
    if (x.size() != cols_) throw IndexError("matvec: size mismatch");
    std::vector<cd> y(rows_, cd(0.0));
    for (size_t i = 0; i < rows_; ++i) {
      cd acc = 0.0;
      for (size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

  ComplexMatrix matmul(const ComplexMatrix& b) const {
    if (cols_ != b.rows_) throw IndexError("matmul: size mismatch");
    ComplexMatrix r(rows_, b.cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t k = 0; k < cols_; ++k) {
        cd aik = (*this)(i, k);
        if (aik == cd(0.0)) continue;
        for (size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  ComplexMatrix transposed() const {
    ComplexMatrix t(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  ComplexMatrix conjugated() const {
    ComplexMatrix c(rows_, cols_);
    for (size_t i = 0; i < rows_ * cols_; ++i) c.a_[i] = std::conj(a_[i]);
    return c;
  }

private:
  size_t rows_, cols_;
  std::vector<cd> a_;
};

namespace detail {

// In-place column-pivoted Householder QR. Returns the magnitudes of the R
// diagonal in pivot order and, via `reflectors`, the Householder vectors
// needed to reassemble columns of Q.
struct QrResult {
  std::vector<double> rdiag_abs;
  std::vector<std::vector<cd>> reflectors;  // v_k, length rows, zero above k
};

inline QrResult householder_qr(ComplexMatrix a, bool pivot) {
  const size_t m = a.rows(), n = a.cols();
  const size_t steps = std::min(m, n);
  QrResult out;
  out.rdiag_abs.reserve(steps);
  out.reflectors.reserve(steps);
  std::vector<size_t> cols(n);
  for (size_t j = 0; j < n; ++j) cols[j] = j;

  for (size_t k = 0; k < steps; ++k) {
    if (pivot) {
      size_t best = k;
      double best_norm = -1.0;
      for (size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (size_t i = k; i < m; ++i) s += std::norm(a(i, cols[j]));
        if (s > best_norm) {
          best_norm = s;
          best = j;
        }
      }
      std::swap(cols[k], cols[best]);
    }
    size_t c = cols[k];
    double beta = 0.0;
    for (size_t i = k; i < m; ++i) beta += std::norm(a(i, c));
    beta = std::sqrt(beta);
    std::vector<cd> v(m, cd(0.0));
    if (beta == 0.0) {
      out.rdiag_abs.push_back(0.0);
      out.reflectors.push_back(std::move(v));
      continue;
    }
    cd x0 = a(k, c);
    cd phase = (x0 == cd(0.0)) ? cd(1.0) : x0 / std::abs(x0);
    cd mu = -phase * beta;
    for (size_t i = k; i < m; ++i) v[i] = a(i, c);
    v[k] -= mu;
    double vv = 0.0;
    for (size_t i = k; i < m; ++i) vv += std::norm(v[i]);
    if (vv > 0.0) {
      // apply H = I - 2 v v^H / (v^H v) to the trailing columns
      for (size_t jj = k; jj < n; ++jj) {
        size_t cc = cols[jj];
        cd dot = 0.0;
        for (size_t i = k; i < m; ++i) dot += std::conj(v[i]) * a(i, cc);
        cd f = 2.0 * dot / vv;
        for (size_t i = k; i < m; ++i) a(i, cc) -= f * v[i];
      }
    }
    out.rdiag_abs.push_back(std::abs(a(k, c)));
    out.reflectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

// Numerical rank: pivot magnitudes of a column-pivoted QR above
// tol * (largest pivot). Empty or zero matrices have rank 0.
inline size_t rank(const ComplexMatrix& m, double tol = 1e-9) {
  if (tol < 0.0) throw DomainError("rank: tol must be nonnegative");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  auto qr = detail::householder_qr(m, /*pivot=*/true);
  double top = 0.0;
  for (double d : qr.rdiag_abs) top = std::max(top, d);
  if (top == 0.0) return 0;
  size_t r = 0;
  for (double d : qr.rdiag_abs)
    if (d > tol * top) ++r;
  return r;
}

// rough conditioning proxy: largest over smallest QR pivot magnitude
inline double cond_estimate(const ComplexMatrix& m) {
  auto qr = detail::householder_qr(m, /*pivot=*/true);
  double top = 0.0, bot = HUGE_VAL;
  for (double d : qr.rdiag_abs) {
    top = std::max(top, d);
    bot = std::min(bot, d);
  }
  if (bot == 0.0) return HUGE_VAL;
  return top / bot;
}

// Square solve by partially pivoted LU.
inline std::vector<cd> solve_linear(ComplexMatrix a, std::vector<cd> b) {
  const size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw IndexError("solve_linear: shape mismatch");
  double scale = a.max_abs();
  if (scale == 0.0) throw Singular("solve_linear: zero matrix");
  for (size_t k = 0; k < n; ++k) {
    size_t piv = k;
    double best = std::abs(a(k, k));
    for (size_t i = k + 1; i < n; ++i) {
      double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= 1e-13 * scale) throw Singular("solve_linear: rank-deficient system");
    if (piv != k) {
      for (size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (size_t i = k + 1; i < n; ++i) {
      cd f = a(i, k) / a(k, k);
      if (f == cd(0.0)) continue;
      a(i, k) = 0.0;
      for (size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<cd> x(n);
  for (size_t i = n; i-- > 0;) {
    cd acc = b[i];
    for (size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

// Left null vector of a full-column-rank (n+1) x n matrix: the unique (up
// to phase) w with w^T m = 0. Returned with unit norm and the first
// above-threshold entry made real-positive so transcripts are reproducible.
inline std::vector<cd> left_null_vector(const ComplexMatrix& m, double tol = 1e-9) {
  const size_t rows = m.rows(), cols = m.cols();
  if (rows != cols + 1) throw IndexError("left_null_vector: need rows == cols + 1");
  // For q = last column of Q in a full QR of conj(m): q^H conj(m) = 0,
  // and conjugating that identity gives q^T m = 0. So w = q.
  auto qr = detail::householder_qr(m.conjugated(), /*pivot=*/false);
  double top = 0.0;
  for (double d : qr.rdiag_abs) top = std::max(top, d);
  for (double d : qr.rdiag_abs)
    if (!(d > tol * top) || top == 0.0)
      throw RankDeficient("left_null_vector: input has column rank < cols");
  // q = H_1 H_2 ... H_cols e_rows
  std::vector<cd> q(rows, cd(0.0));
  q[rows - 1] = 1.0;
  for (size_t k = cols; k-- > 0;) {
    const auto& v = qr.reflectors[k];
    double vv = 0.0;
    for (size_t i = k; i < rows; ++i) vv += std::norm(v[i]);
    if (vv == 0.0) continue;
    cd dot = 0.0;
    for (size_t i = k; i < rows; ++i) dot += std::conj(v[i]) * q[i];
    cd f = 2.0 * dot / vv;
    for (size_t i = k; i < rows; ++i) q[i] -= f * v[i];
  }
  std::vector<cd> w = std::move(q);
  // canonical form
  double norm = 0.0;
  for (const cd& v : w) norm += std::norm(v);
  norm = std::sqrt(norm);
  for (cd& v : w) v /= norm;
  for (const cd& v : w) {
    if (std::abs(v) > 1e-12) {
      cd phase = v / std::abs(v);
      for (cd& u : w) u /= phase;
      break;
    }
  }
  return w;
}

}  // namespace dofnet
