#pragma once

// Dense complex linear algebra for the small (dim <= 16) matrices used across
// the simulator: Hermitian eigendecomposition by cyclic complex Jacobi
// rotations, PSD square roots, scaling-and-squaring matrix exponential and the
// operator 2-norm.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ptsim/errors.hpp"
#include "ptsim/tolerances.hpp"

namespace ptsim {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Row-major dense complex matrix.
class ComplexMatrix {
public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx{}) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionMismatch("entry count " + std::to_string(data_.size()) + " does not match " +
                              std::to_string(rows_) + "x" + std::to_string(cols_));
    check_finite();
  }

  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionMismatch("ragged initializer list");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    check_finite();
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const cplx> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static ComplexMatrix diagonal(std::initializer_list<cplx> d) {
    return diagonal(std::span<const cplx>(d.begin(), d.size()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const cplx> data() const noexcept { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  ComplexMatrix transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  ComplexMatrix conj() const {
    ComplexMatrix out = *this;
    for (auto& v : out.data_) v = std::conj(v);
    return out;
  }

  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  /// Largest entry magnitude.
  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Induced 1-norm (max column sum).
  double norm1() const {
    double best = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) s += std::abs((*this)(r, c));
      best = std::max(best, s);
    }
    return best;
  }

  /// Copy of the rows x cols block whose top-left corner is (r0, c0).
  ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
    if (r0 + rows > rows_ || c0 + cols > cols_) throw DimensionMismatch("block out of range");
    ComplexMatrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
    return out;
  }

  void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionMismatch("block out of range");
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) (*this)(r0 + r, c0 + c) = b(r, c);
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator/(ComplexMatrix a, double s) { return a *= cplx(1.0 / s); }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_)
      throw DimensionMismatch("cannot multiply " + a.shape() + " by " + b.shape());
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  std::vector<cplx> apply(std::span<const cplx> v) const {
    if (v.size() != cols_) throw DimensionMismatch("vector length does not match matrix columns");
    std::vector<cplx> out(rows_, cplx{});
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out[r] += (*this)(r, c) * v[c];
    return out;
  }

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw DimensionMismatch("shape " + shape() + " vs " + o.shape());
  }
  void check_finite() const {
    for (const auto& v : data_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NonFinite("matrix entry is NaN or infinite");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// max |a - b| entry-wise.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

/// max |M - M^dag|.
inline double hermiticity_residual(const ComplexMatrix& m) { return max_abs_diff(m, m.adjoint()); }

/// max |U U^dag - I|.
inline double unitarity_residual(const ComplexMatrix& u) {
  return max_abs_diff(u * u.adjoint(), ComplexMatrix::identity(u.rows()));
}

/// (M + M^dag) / 2, removing roundoff asymmetry from constructions that are
/// Hermitian in exact arithmetic.
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) * cplx(0.5); }

struct HermEig {
  std::vector<double> values; // ascending
  ComplexMatrix vectors;      // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot a_pq with a diagonal
/// unitary and then annihilates the now-real pivot with a real Givens rotation
/// chosen by the small-angle root. Throws NotHermitian when the input departs
/// from Hermiticity by more than tolerances().herm (relative to max(1, |M|)),
/// and NoConvergence if the sweep cap is reached.
inline HermEig herm_eig(const ComplexMatrix& m) {
  if (!m.is_square()) throw DimensionMismatch("herm_eig needs a square matrix, got " + m.shape());
  const auto& tol = tolerances();
  const double scale = std::max(1.0, m.max_abs());
  if (hermiticity_residual(m) > tol.herm * scale)
    throw NotHermitian("max |M - M^dag| = " + detail::num(hermiticity_residual(m)));

  const std::size_t n = m.rows();
  ComplexMatrix a = hermitian_part(m);
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += std::norm(a(p, q));
    return std::sqrt(s);
  };
  auto diag_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) s += std::norm(a(p, p));
    return std::sqrt(s);
  };

  int sweep = 0;
  while (true) {
    const double off = off_norm();
    if (off <= 1e-17 * std::max(1e-300, diag_norm()) || off == 0.0) break;
    if (sweep++ >= tol.jacobi_max_sweeps)
      throw NoConvergence("Jacobi did not converge in " + std::to_string(tol.jacobi_max_sweeps) + " sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        if (mag < 1e-3 * std::numeric_limits<double>::epsilon() *
                      (std::abs(a(p, p).real()) + std::abs(a(q, q).real()))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const cplx phase = std::conj(apq) / mag; // e^{-i arg a_pq}
        const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // J restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        const cplx jpp = c, jpq = s, jqp = -s * phase, jqq = c * phase;
        for (std::size_t k = 0; k < n; ++k) { // A <- A J
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) { // A <- J^dag A
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) { // V <- V J
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermEig out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

/// V f(diag) V^dag for an eigendecomposition.
template <class F>
ComplexMatrix apply_spectral(const HermEig& eig, F&& f) {
  const std::size_t n = eig.values.size();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = eig.vectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
    }
  }
  return out;
}

/// Unique Hermitian PSD square root.
///
/// Eigenvalues in [-psd_clamp, 0) are roundoff and are clamped to zero, as are
/// positive eigenvalues at the level of machine precision relative to the
/// spectrum (their square roots would otherwise inject ~1e-8 noise). Callers
/// that know the absolute noise level of `m` can raise that floor.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m, double zero_floor = 0.0) {
  const auto eig = herm_eig(m);
  const double clamp = tolerances().psd_clamp;
  double spread = 1.0;
  for (double l : eig.values) spread = std::max(spread, std::abs(l));
  const double floor = std::max(zero_floor, 64.0 * std::numeric_limits<double>::epsilon() * spread);
  for (double l : eig.values)
    if (l < -clamp) throw NotPSD("eigenvalue " + detail::num(l) + " below -" + detail::num(clamp));
  return hermitian_part(apply_spectral(eig, [&](double l) { return l <= floor ? 0.0 : std::sqrt(l); }));
}

/// Matrix exponential by scaling and squaring with a degree-20 Taylor
/// polynomial. The argument is scaled until its induced 1-norm (an upper
/// bound on both the max-entry and the spectral norm) is at most 1/2.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionMismatch("expm needs a square matrix, got " + a.shape());
  constexpr int kOrder = 20;
  const std::size_t n = a.rows();
  int squarings = 0;
  double norm = a.norm1();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const ComplexMatrix x = a * cplx(std::ldexp(1.0, -squarings));
  // Horner: I + x(I + x/2(I + x/3(...)))
  ComplexMatrix result = ComplexMatrix::identity(n);
  for (int k = kOrder; k >= 1; --k) {
    result = ComplexMatrix::identity(n) + (x * result) * cplx(1.0 / k);
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// Largest singular value, sqrt(lambda_max(A^dag A)).
inline double op_norm2(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionMismatch("op_norm2 needs a square matrix, got " + a.shape());
  if (a.rows() == 0) return 0.0;
  const auto eig = herm_eig(hermitian_part(a.adjoint() * a));
  return std::sqrt(std::max(0.0, eig.values.back()));
}

} // namespace ptsim
