#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "ptsim/errors.hpp"
#include "ptsim/linalg.hpp"
#include "ptsim/tolerances.hpp"

namespace ptsim {

/// Chain of N modes with unit nearest-neighbour coupling and balanced
/// imaginary potentials +i gamma (mode 1, gain) and -i gamma (mode N, loss).
/// Energies are in units of the coupling J = 1 and hbar = 1.
class PTModel {
public:
  PTModel(int n_modes, double gamma) : n_modes_(n_modes), gamma_(gamma) {
    if (n_modes < 2) throw InvalidModel("n_modes must be >= 2, got " + std::to_string(n_modes));
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      throw InvalidModel("gamma must be finite and >= 0, got " + detail::num(gamma));
  }

  int n_modes() const noexcept { return n_modes_; }
  double gamma() const noexcept { return gamma_; }

  friend bool operator==(const PTModel&, const PTModel&) = default;

private:
  int n_modes_;
  double gamma_;
};

enum class SymmetryPhase { Hermitian, Unbroken, ExceptionalPoint, Broken };

inline std::string_view to_string(SymmetryPhase p) {
  switch (p) {
  case SymmetryPhase::Hermitian: return "Hermitian";
  case SymmetryPhase::Unbroken: return "Unbroken";
  case SymmetryPhase::ExceptionalPoint: return "ExceptionalPoint";
  case SymmetryPhase::Broken: return "Broken";
  }
  return "unknown";
}

inline ComplexMatrix build_hamiltonian(const PTModel& m) {
  const auto n = static_cast<std::size_t>(m.n_modes());
  ComplexMatrix h(n, n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h(k, k + 1) = -1.0;
    h(k + 1, k) = -1.0;
  }
  h(0, 0) = cplx(0.0, m.gamma());
  h(n - 1, n - 1) = cplx(0.0, -m.gamma());
  return h;
}

/// 1 for even N, sqrt((N+1)/(N-1)) for odd N.
inline double critical_gamma(const PTModel& m) {
  const int n = m.n_modes();
  if (n % 2 == 0) return 1.0;
  return std::sqrt(static_cast<double>(n + 1) / static_cast<double>(n - 1));
}

inline SymmetryPhase classify_phase(const PTModel& m, double tol_ep = tolerances().ep) {
  if (!(tol_ep > 0.0)) throw SpecError("tol_ep must be positive");
  const double gc = critical_gamma(m);
  if (m.gamma() == 0.0) return SymmetryPhase::Hermitian;
  if (std::abs(m.gamma() - gc) < tol_ep) return SymmetryPhase::ExceptionalPoint;
  return m.gamma() < gc ? SymmetryPhase::Unbroken : SymmetryPhase::Broken;
}

/// G(t) = exp(-i H t). Negative t evolves backwards.
inline ComplexMatrix propagator(const PTModel& m, double t) {
  if (!std::isfinite(t)) throw SpecError("time must be finite");
  return expm(build_hamiltonian(m) * cplx(0.0, -t));
}

/// Oscillation period (unbroken phase) or relaxation scale (broken phase,
/// periodic == false) of the probability dynamics.
struct Period {
  double value;
  bool periodic;
};

/// Closed forms exist for N = 2 (pi / sqrt|1 - gamma^2|) and N = 3
/// (2 pi / sqrt|2 - gamma^2|). Returns nullopt at the exceptional point, where
/// the period diverges, and for every other N.
inline std::optional<Period> fundamental_period(const PTModel& m, double tol_ep = tolerances().ep) {
  const double g2 = m.gamma() * m.gamma();
  double numerator = 0.0, gap2 = 0.0;
  if (m.n_modes() == 2) {
    numerator = std::numbers::pi;
    gap2 = 1.0 - g2;
  } else if (m.n_modes() == 3) {
    numerator = 2.0 * std::numbers::pi;
    gap2 = 2.0 - g2;
  } else {
    return std::nullopt;
  }
  const auto phase = classify_phase(m, tol_ep);
  if (phase == SymmetryPhase::ExceptionalPoint) return std::nullopt;
  return Period{numerator / std::sqrt(std::abs(gap2)), phase != SymmetryPhase::Broken};
}

/// Anti-diagonal parity permutation P_{mn} = delta_{m, N+1-n}.
inline ComplexMatrix parity_matrix(std::size_t n) {
  ComplexMatrix p(n, n);
  for (std::size_t k = 0; k < n; ++k) p(k, n - 1 - k) = 1.0;
  return p;
}

} // namespace ptsim
