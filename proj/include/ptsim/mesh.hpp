#pragma once

// Triangular (Reck) compilation of an M-mode unitary into M(M-1)/2
// adjacent-mode Mach-Zehnder stages plus a final layer of output phases.
//
// Stage convention on modes (i, i+1), with theta the internal and phi the
// external phase:
//
//     T(theta, phi) = [[ e^{i phi} cos theta, -sin theta ],
//                      [ e^{i phi} sin theta,  cos theta ]]
//
// and a program realises U = diag(e^{i out_k}) * T_K * ... * T_2 * T_1, where
// T_1 is the first stage light meets.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ptsim/errors.hpp"
#include "ptsim/linalg.hpp"
#include "ptsim/tolerances.hpp"

namespace ptsim {

struct MeshStage {
  std::size_t first_mode; // acts on (first_mode, first_mode + 1)
  double theta;
  double phi;
};

struct MeshProgram {
  std::size_t modes = 0;
  std::vector<MeshStage> stages;
  std::vector<double> output_phases;
};

inline constexpr std::size_t kMaxMeshModes = 16;

/// Wraps an angle into [0, 2 pi).
inline double canonical_phase(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

namespace detail {

inline void apply_stage_left(ComplexMatrix& m, const MeshStage& s) {
  const std::size_t i = s.first_mode, j = i + 1;
  const cplx e = std::polar(1.0, s.phi);
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  for (std::size_t col = 0; col < m.cols(); ++col) {
    const cplx a = m(i, col), b = m(j, col);
    m(i, col) = e * c * a - sn * b;
    m(j, col) = e * sn * a + c * b;
  }
}

// m <- m T^dag on columns (i, i+1).
inline void apply_stage_inverse_right(ComplexMatrix& m, const MeshStage& s) {
  const std::size_t i = s.first_mode, j = i + 1;
  const cplx e = std::polar(1.0, -s.phi);
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  for (std::size_t row = 0; row < m.rows(); ++row) {
    const cplx a = m(row, i), b = m(row, j);
    m(row, i) = a * e * c - b * sn;
    m(row, j) = a * e * sn + b * c;
  }
}

} // namespace detail

/// Forward model of the mesh: the program's transfer matrix.
inline ComplexMatrix mesh_apply(const MeshProgram& p) {
  ComplexMatrix u = ComplexMatrix::identity(p.modes);
  for (const auto& s : p.stages) {
    if (s.first_mode + 1 >= p.modes) throw DimensionMismatch("stage acts outside the mesh");
    detail::apply_stage_left(u, s);
  }
  if (!p.output_phases.empty()) {
    if (p.output_phases.size() != p.modes) throw DimensionMismatch("output phase count differs from mode count");
    for (std::size_t r = 0; r < p.modes; ++r) {
      const cplx e = std::polar(1.0, p.output_phases[r]);
      for (std::size_t c = 0; c < p.modes; ++c) u(r, c) *= e;
    }
  }
  return u;
}

/// Reck decomposition. Rows are cleared from the bottom up; within row r the
/// entries left of the diagonal are nulled column by column, each by a stage
/// on columns (c, c+1) that moves the weight rightwards. Already-zero entries
/// still emit a theta = 0 stage so every dense program has M(M-1)/2 stages.
inline MeshProgram reck_decompose(const ComplexMatrix& u) {
  if (!u.is_square()) throw DimensionMismatch("reck_decompose needs a square matrix, got " + u.shape());
  const std::size_t m = u.rows();
  if (m > kMaxMeshModes) throw TooLarge("mesh supports at most " + std::to_string(kMaxMeshModes) + " modes");
  const double residual = unitarity_residual(u);
  if (residual > tolerances().unitary_input)
    throw NotUnitary("|U U^dag - I|_max = " + detail::num(residual));

  MeshProgram program;
  program.modes = m;
  ComplexMatrix work = u;
  for (std::size_t r = m; r-- > 1;) {
    for (std::size_t c = 0; c < r; ++c) {
      const cplx x = work(r, c), y = work(r, c + 1);
      MeshStage s{c, 0.0, 0.0};
      if (std::abs(x) > 0.0) {
        s.theta = std::atan2(std::abs(x), std::abs(y));
        s.phi = canonical_phase(std::arg(x) - (std::abs(y) > 0.0 ? std::arg(y) : 0.0));
      }
      detail::apply_stage_inverse_right(work, s);
      work(r, c) = 0.0;
      program.stages.push_back(s);
    }
  }
  // work = U T_1^dag ... T_K^dag is now diagonal, so U = D T_K ... T_1.
  program.output_phases.resize(m);
  for (std::size_t k = 0; k < m; ++k) program.output_phases[k] = canonical_phase(std::arg(work(k, k)));
  return program;
}

/// Product of `parts` as written, parts[0] * parts[1] * ... , so the last
/// element acts first on the input light.
inline ComplexMatrix compose_experiment(std::span<const ComplexMatrix> parts) {
  if (parts.empty()) throw DimensionMismatch("nothing to compose");
  ComplexMatrix out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    if (parts[k].rows() != out.cols() || !parts[k].is_square())
      throw DimensionMismatch("cannot compose " + out.shape() + " with " + parts[k].shape());
    out = out * parts[k];
  }
  return out;
}

/// Places `u` on modes [offset, offset + u.rows()) of an identity on
/// `total_modes` modes.
inline ComplexMatrix embed(const ComplexMatrix& u, std::size_t total_modes, std::size_t offset) {
  if (!u.is_square() || offset + u.rows() > total_modes) throw DimensionMismatch("embedding does not fit");
  ComplexMatrix out = ComplexMatrix::identity(total_modes);
  out.set_block(offset, offset, u);
  return out;
}

/// Entangling stage used to prepare the mixed single-photon input on six
/// modes: the first two modes are the ancillary qubit, the last four carry
/// the dilated two-mode system.
inline ComplexMatrix entangling_unitary() {
  const double r = std::numbers::sqrt2 / 2.0;
  return ComplexMatrix{
      {0, 0, r, r, 0, 0},
      {0, 0, 0, 0, r, r},
      {1, 0, 0, 0, 0, 0},
      {0, 1, 0, 0, 0, 0},
      {0, 0, r, -r, 0, 0},
      {0, 0, 0, 0, r, -r},
  };
}

enum class PauliBasis { X, Y, Z };

/// Six-mode projection stage rotating the dual-rail qubit on modes
/// (first_mode, first_mode + 1) into the eigenbasis of the chosen Pauli
/// operator.
inline ComplexMatrix pauli_projection(PauliBasis basis, std::size_t first_mode = 0, std::size_t total_modes = 6) {
  const double r = std::numbers::sqrt2 / 2.0;
  ComplexMatrix b = ComplexMatrix::identity(2);
  if (basis == PauliBasis::X) b = ComplexMatrix{{r, r}, {r, -r}};
  if (basis == PauliBasis::Y) b = ComplexMatrix{{r, cplx(0, -r)}, {r, cplx(0, r)}};
  return embed(b, total_modes, first_mode);
}

} // namespace ptsim
