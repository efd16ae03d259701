#pragma once

// Independent reference implementations and random generators shared by the
// test binaries. Nothing here calls the library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ptsim/linalg.hpp"

namespace ptsim::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20260417);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }
inline cplx gaussian_complex() {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng()), n(rng())};
}

inline ComplexMatrix random_matrix(std::size_t r, std::size_t c) {
  ComplexMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = gaussian_complex();
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n) {
  const ComplexMatrix a = random_matrix(n, n);
  return (a + a.adjoint()) * cplx(0.5);
}

/// Haar-distributed unitary: Gram-Schmidt on a Ginibre matrix (column by
/// column, with the phase convention that makes the result Haar).
inline ComplexMatrix haar_unitary(std::size_t n) {
  ComplexMatrix q = random_matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < j; ++k) {
        cplx dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, k)) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
      }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += std::norm(q(i, j));
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) q(i, j) /= norm;
  }
  return q;
}

/// Plain Taylor series with 60 terms after scaling by 2^-s, then squaring.
/// Deliberately different from the library's degree-20 Horner scheme.
inline ComplexMatrix expm_taylor(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  int s = 0;
  double norm = a.max_abs() * static_cast<double>(n);
  while (norm > 0.1) {
    norm /= 2.0;
    ++s;
  }
  const ComplexMatrix x = a / std::ldexp(1.0, s);
  ComplexMatrix term = ComplexMatrix::identity(n);
  ComplexMatrix sum = term;
  for (int k = 1; k <= 60; ++k) {
    term = term * x / static_cast<double>(k);
    sum = sum + term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

/// Permanent as a sum over all permutations.
inline cplx permanent_bruteforce(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  if (n == 0) return 1.0;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  cplx total = 0.0;
  do {
    cplx prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= a(i, perm[i]);
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// Largest singular value by power iteration on A^dag A.
inline double spectral_norm_power(const ComplexMatrix& a) {
  std::vector<cplx> v(a.cols(), cplx(1.0, 0.3));
  double lambda = 0.0;
  const ComplexMatrix b = a.adjoint() * a;
  for (int it = 0; it < 2000; ++it) {
    auto w = b.apply(v);
    double nrm = 0.0;
    for (const auto& x : w) nrm += std::norm(x);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (auto& x : w) x /= nrm;
    lambda = nrm;
    v = std::move(w);
  }
  return std::sqrt(lambda);
}

} // namespace ptsim::testing
