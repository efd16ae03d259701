#pragma once

// Embedding of the non-unitary propagator into a unitary on twice as many
// modes. The top-left block evolves the forward system with the normalised
// propagator, the bottom-right block evolves its time-reversed twin, and the
// defect operator couples the two.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "ptsim/errors.hpp"
#include "ptsim/linalg.hpp"
#include "ptsim/pt_model.hpp"
#include "ptsim/tolerances.hpp"

namespace ptsim {

enum class Normalization {
  TimeLocal, // divide by |G(t)|_2 at each t
  GlobalMax, // divide by max over a supplied time grid
};

struct NormalizedEvolution {
  ComplexMatrix g_tilde;
  double scale = 1.0; // the divisor applied to G(gamma, t)
  double t = 0.0;
  PTModel model;
};

/// G~ = G / |G|_2 at time t.
inline NormalizedEvolution normalize(const PTModel& m, double t) {
  ComplexMatrix g = propagator(m, t);
  const double scale = op_norm2(g);
  return {g / scale, scale, t, m};
}

/// G~ = G / max_s |G(s)|_2 over `horizon` (which must contain t for the
/// result to be a contraction). Kept for comparison with the time-local
/// choice; the dilation accepts any contraction.
inline NormalizedEvolution normalize(const PTModel& m, double t, Normalization mode,
                                     std::span<const double> horizon = {}) {
  if (mode == Normalization::TimeLocal) return normalize(m, t);
  double scale = op_norm2(propagator(m, t));
  for (double s : horizon) scale = std::max(scale, op_norm2(propagator(m, s)));
  return {propagator(m, t) / scale, scale, t, m};
}

/// D = (I - G~ G~^dag)^{1/2}.
///
/// The square root is not Lipschitz at 0: an eigenvalue carrying absolute
/// roundoff e contributes sqrt(e) to D, which breaks G~ D* = D G~ and so the
/// unitarity of the dilation. Eigenvalues below tolerances().defect_floor
/// (about e^{2/3}) are therefore set to zero; this costs at most that much
/// in the diagonal blocks of U U^dag.
inline ComplexMatrix defect(const NormalizedEvolution& ne) {
  const std::size_t n = ne.g_tilde.rows();
  return psd_sqrt(hermitian_part(ComplexMatrix::identity(n) - ne.g_tilde * ne.g_tilde.adjoint()),
                  tolerances().defect_floor);
}

class DilatedUnitary {
public:
  DilatedUnitary(ComplexMatrix u, PTModel model, double t, double scale)
      : u_(std::move(u)), model_(model), t_(t), scale_(scale) {}

  const ComplexMatrix& matrix() const noexcept { return u_; }
  const PTModel& model() const noexcept { return model_; }
  double t() const noexcept { return t_; }
  double scale() const noexcept { return scale_; }
  std::size_t half() const noexcept { return u_.rows() / 2; }

  ComplexMatrix g_tilde() const { return u_.block(0, 0, half(), half()); }
  ComplexMatrix i_defect() const { return u_.block(0, half(), half(), half()); }
  ComplexMatrix i_defect_conj() const { return u_.block(half(), 0, half(), half()); }
  ComplexMatrix g_tilde_dag() const { return u_.block(half(), half(), half(), half()); }

private:
  ComplexMatrix u_;
  PTModel model_;
  double t_;
  double scale_;
};

/// U = [[G~, iD], [iD*, G~^dag]]. Throws UnitarityFailure if the assembled
/// matrix misses unitarity by tolerances().dilation_unitarity.
inline DilatedUnitary dilate(const NormalizedEvolution& ne) {
  const std::size_t n = ne.g_tilde.rows();
  const ComplexMatrix d = defect(ne);
  ComplexMatrix u(2 * n, 2 * n);
  u.set_block(0, 0, ne.g_tilde);
  u.set_block(0, n, d * kI);
  u.set_block(n, 0, d.conj() * kI);
  u.set_block(n, n, ne.g_tilde.adjoint());
  const double residual = unitarity_residual(u);
  if (residual >= tolerances().dilation_unitarity)
    throw UnitarityFailure("|U U^dag - I|_max = " + detail::num(residual));
  return DilatedUnitary(std::move(u), ne.model, ne.t, ne.scale);
}

inline DilatedUnitary dilate(const PTModel& m, double t) { return dilate(normalize(m, t)); }

/// H_eff = i (dU/dt) U^dag with a central difference of step dt. The dilated
/// family is only piecewise smooth in t: where the two largest singular values
/// of G cross, the derivative has asymptotes, reported as AsymptoteSuspected
/// when |H_eff|_max exceeds `cap`.
inline ComplexMatrix effective_hamiltonian(const PTModel& m, double t, double dt = 1e-5,
                                           double cap = tolerances().heff_cap) {
  if (!(dt > 0.0)) throw SpecError("dt must be positive");
  const ComplexMatrix up = dilate(m, t + dt).matrix();
  const ComplexMatrix um = dilate(m, t - dt).matrix();
  const ComplexMatrix u = dilate(m, t).matrix();
  ComplexMatrix h = ((up - um) * cplx(0.0, 1.0 / (2.0 * dt))) * u.adjoint();
  if (h.max_abs() > cap)
    throw AsymptoteSuspected("|H_eff|_max = " + detail::num(h.max_abs()) + " at t = " + detail::num(t));
  return h;
}

} // namespace ptsim
