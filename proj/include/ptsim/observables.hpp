#pragma once

// Single-photon observables of the dilated system: density matrices over the
// 2N one-photon modes, reduced forward/reverse states with the vacuum
// bookkeeping, entropy, the S_F/S_R coherence observable, the signalling
// protocol and the single-particle series drivers.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ptsim/dilation.hpp"
#include "ptsim/errors.hpp"
#include "ptsim/linalg.hpp"
#include "ptsim/pt_model.hpp"
#include "ptsim/tolerances.hpp"

namespace ptsim {

/// Hermitian, PSD, unit-trace matrix. Construction validates all three.
class DensityMatrix {
public:
  static DensityMatrix from_matrix(ComplexMatrix m) {
    if (!m.is_square()) throw DimensionMismatch("density matrix must be square, got " + m.shape());
    const auto& tol = tolerances();
    if (hermiticity_residual(m) > tol.density_herm)
      throw InvalidDensity("not Hermitian: residual " + detail::num(hermiticity_residual(m)));
    m = hermitian_part(m);
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > tol.density_trace) throw InvalidDensity("trace " + detail::num(tr));
    const auto eig = herm_eig(m);
    if (eig.values.front() < -tol.density_eig)
      throw InvalidDensity("negative eigenvalue " + detail::num(eig.values.front()));
    return DensityMatrix(std::move(m));
  }

  /// |psi><psi| for a normalised state vector.
  static DensityMatrix pure(std::span<const cplx> psi) {
    ComplexMatrix m(psi.size(), psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
      for (std::size_t j = 0; j < psi.size(); ++j) m(i, j) = psi[i] * std::conj(psi[j]);
    return from_matrix(std::move(m));
  }

  static DensityMatrix basis_state(std::size_t dim, std::size_t k) {
    ComplexMatrix m(dim, dim);
    m(k, k) = 1.0;
    return DensityMatrix(std::move(m));
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.rows(); }
  double population(std::size_t k) const { return m_(k, k).real(); }

private:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// U rho U^dag.
inline DensityMatrix evolve_density(const ComplexMatrix& u, const DensityMatrix& rho0) {
  if (u.rows() != rho0.dim() || !u.is_square())
    throw DimensionMismatch("unitary " + u.shape() + " vs density of dim " + std::to_string(rho0.dim()));
  return DensityMatrix::from_matrix(hermitian_part(u * rho0.matrix() * u.adjoint()));
}

enum class Side { Forward, Reverse };

/// Reduced state of one subsystem over {vac, |1>, ..., |N>}.
struct SubsystemState {
  Side side;
  DensityMatrix rho;

  double vacuum_population() const { return rho.population(0); }
};

/// Partial trace of a one-photon state over 2N modes: the retained side keeps
/// its N x N block, the discarded side's populations collapse into the
/// retained side's vacuum, and no vacuum/one-photon coherence survives.
inline SubsystemState reduce(const DensityMatrix& rho_full, Side keep) {
  if (rho_full.dim() % 2 != 0) throw DimensionMismatch("full state must span 2N modes");
  const std::size_t n = rho_full.dim() / 2;
  const std::size_t kept = keep == Side::Forward ? 0 : n;
  const std::size_t dropped = keep == Side::Forward ? n : 0;
  const auto& full = rho_full.matrix();
  ComplexMatrix out(n + 1, n + 1);
  double vac = 0.0;
  for (std::size_t k = 0; k < n; ++k) vac += full(dropped + k, dropped + k).real();
  out(0, 0) = vac;
  out.set_block(1, 1, full.block(kept, kept, n, n));
  return {keep, DensityMatrix::from_matrix(std::move(out))};
}

/// Forward block of the full state divided by its trace, i.e. the state of
/// the forward system conditioned on the excitation not having tunnelled.
inline DensityMatrix renormalized_forward(const DensityMatrix& rho_full) {
  if (rho_full.dim() % 2 != 0) throw DimensionMismatch("full state must span 2N modes");
  const std::size_t n = rho_full.dim() / 2;
  ComplexMatrix block = rho_full.matrix().block(0, 0, n, n);
  const double tr = block.trace().real();
  if (tr <= tolerances().vanishing_support)
    throw VanishingSupport("forward trace " + detail::num(tr));
  return DensityMatrix::from_matrix(block / tr);
}

/// -sum lambda ln lambda, with 0 ln 0 = 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double l : herm_eig(rho.matrix()).values)
    if (l > 0.0) s -= l * std::log(l);
  return std::max(0.0, s);
}

/// <S> with S = |1><2| + |2><1| in the {vac, 1, 2} basis.
inline double s_expectation(const DensityMatrix& state) {
  if (state.dim() != 3) throw DimensionMismatch("S acts on the {vac, 1, 2} basis (dim 3)");
  return (state.matrix()(1, 2) + state.matrix()(2, 1)).real();
}

/// rho_in = 1/2 (|1F><1F| + |1R><1R|) + a (|1F><1R| + |1R><1F|) over the four
/// modes (F1, F2, R1, R2).
inline DensityMatrix coherent_pair_input(double a) {
  if (!(a >= 0.0 && a <= 0.5)) throw InvalidCoherence("a must lie in [0, 1/2], got " + detail::num(a));
  ComplexMatrix m(4, 4);
  m(0, 0) = 0.5;
  m(2, 2) = 0.5;
  m(0, 2) = a;
  m(2, 0) = a;
  return DensityMatrix::from_matrix(std::move(m));
}

struct ZitterPoint {
  double t;
  double s_forward;
  double s_reverse;
};

/// <S_F>(t) and <S_R>(t) for the coherent pair input. The fully mixed case
/// a = 0 is evaluated as the average of the two orthogonal pure runs |1F>
/// and |1R>.
inline std::vector<ZitterPoint> zitterbewegung_series(const PTModel& m, double a, std::span<const double> t_grid) {
  if (m.n_modes() != 2) throw InvalidModel("the S observable is defined for N = 2");
  const DensityMatrix rho_in = coherent_pair_input(a);
  std::vector<ZitterPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const ComplexMatrix u = dilate(m, t).matrix();
    ZitterPoint p{t, 0.0, 0.0};
    if (a == 0.0) {
      for (std::size_t mode : {std::size_t{0}, std::size_t{2}}) {
        const auto rho = evolve_density(u, DensityMatrix::basis_state(4, mode));
        p.s_forward += 0.5 * s_expectation(reduce(rho, Side::Forward).rho);
        p.s_reverse += 0.5 * s_expectation(reduce(rho, Side::Reverse).rho);
      }
    } else {
      const auto rho = evolve_density(u, rho_in);
      p.s_forward = s_expectation(reduce(rho, Side::Forward).rho);
      p.s_reverse = s_expectation(reduce(rho, Side::Reverse).rho);
    }
    out.push_back(p);
  }
  return out;
}

namespace detail {

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// [P(1|S) - P(2|S)] - [P(1|I) - P(2|I)] for qubit B when qubit A of
/// (|11> + |22>)/sqrt 2 is acted on locally and then evolved by `g`.
inline double signalling_violation_for(const ComplexMatrix& g) {
  const double r = std::numbers::sqrt2 / 2.0;
  const std::vector<cplx> bell{r, 0.0, 0.0, r}; // basis |a b>, index 2a + b
  const ComplexMatrix id2 = ComplexMatrix::identity(2);
  const ComplexMatrix swap{{0.0, 1.0}, {1.0, 0.0}};
  const ComplexMatrix rho0 = DensityMatrix::pure(bell).matrix();

  auto bias_on_b = [&](const ComplexMatrix& local) {
    const ComplexMatrix op = kron(g * local, id2);
    ComplexMatrix rho = op * rho0 * op.adjoint();
    const double tr = rho.trace().real();
    if (tr <= tolerances().vanishing_support) throw VanishingSupport("post-evolution trace " + detail::num(tr));
    rho = rho / tr;
    const double p1 = rho(0, 0).real() + rho(2, 2).real();
    const double p2 = rho(1, 1).real() + rho(3, 3).real();
    return p1 - p2;
  };
  return bias_on_b(swap) - bias_on_b(id2);
}

} // namespace detail

/// Signalling violation after evolving qubit A for time t with the
/// normalised propagator (forward-conditioned, renormalised statistics).
inline double signalling_violation(const PTModel& m, double t) {
  if (m.n_modes() != 2) throw InvalidModel("the signalling protocol is defined for N = 2");
  if (!(t > 0.0) || !std::isfinite(t)) throw SpecError("signalling time must be positive and finite");
  return detail::signalling_violation_for(normalize(m, t).g_tilde);
}

/// t -> infinity limit of the signalling violation at the exceptional point,
/// where G(t) = I - iHt and the normalised propagator tends to -iH / |H|_2.
/// This is an extrapolation, not a finite-time simulation.
inline double signalling_violation_ep_limit(const PTModel& m) {
  if (m.n_modes() != 2) throw InvalidModel("the signalling protocol is defined for N = 2");
  if (classify_phase(m) != SymmetryPhase::ExceptionalPoint) throw SpecError("model is not at its exceptional point");
  const ComplexMatrix h = build_hamiltonian(m) * cplx(0.0, -1.0);
  return detail::signalling_violation_for(h / op_norm2(h));
}

/// Probabilities of a single excitation at each sampled time.
struct SingleParticleRow {
  double t;
  std::vector<double> forward_basis; // vac, |1>_F, ..., |N>_F
  std::vector<double> modes;         // all 2N output modes
};

inline void require_normalized(std::span<const cplx> psi) {
  double n = 0.0;
  for (const auto& a : psi) n += std::norm(a);
  if (std::abs(n - 1.0) > 1e-9) throw SpecError("input state norm^2 is " + detail::num(n) + ", expected 1");
}

inline std::vector<SingleParticleRow> single_particle_series(const PTModel& m, std::span<const cplx> input,
                                                             std::span<const double> t_grid) {
  const auto n = static_cast<std::size_t>(m.n_modes());
  if (input.size() != 2 * n)
    throw DimensionMismatch("input has " + std::to_string(input.size()) + " amplitudes, expected " +
                            std::to_string(2 * n));
  require_normalized(input);
  std::vector<SingleParticleRow> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto psi = dilate(m, t).matrix().apply(input);
    SingleParticleRow row{t, std::vector<double>(n + 1, 0.0), std::vector<double>(2 * n)};
    for (std::size_t k = 0; k < 2 * n; ++k) row.modes[k] = std::norm(psi[k]);
    for (std::size_t k = 0; k < n; ++k) {
      row.forward_basis[k + 1] = row.modes[k];
      row.forward_basis[0] += row.modes[n + k];
    }
    out.push_back(std::move(row));
  }
  return out;
}

/// Named single-photon inputs over the 2N modes (F1..FN, R1..RN).
/// "kF" / "kR" put the photon in mode k of either side; psi1, psi2 and psi3
/// are the N = 3 superposition states related by PT and T.
inline std::vector<cplx> single_photon_preset(std::string_view name, int n_modes) {
  const auto n = static_cast<std::size_t>(n_modes);
  std::vector<cplx> psi(2 * n, cplx{});
  const double r = std::numbers::sqrt2 / 2.0;
  if (name == "psi1" || name == "psi2" || name == "psi3") {
    if (n_modes != 3) throw SpecError(std::string(name) + " is defined for N = 3");
    if (name == "psi1") { psi[0] = r; psi[1] = cplx(0.0, -r); }
    if (name == "psi2") { psi[1] = cplx(0.0, r); psi[2] = r; }
    if (name == "psi3") { psi[3] = r; psi[4] = cplx(0.0, r); }
    return psi;
  }
  if (name.size() >= 2 && (name.back() == 'F' || name.back() == 'R')) {
    const std::string digits(name.substr(0, name.size() - 1));
    char* end = nullptr;
    const long k = std::strtol(digits.c_str(), &end, 10);
    if (!digits.empty() && end == digits.c_str() + digits.size() && k >= 1 && static_cast<std::size_t>(k) <= n) {
      psi[(name.back() == 'F' ? 0 : n) + static_cast<std::size_t>(k - 1)] = 1.0;
      return psi;
    }
  }
  throw SpecError("unknown single-photon preset '" + std::string(name) + "'");
}

} // namespace ptsim
