#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ptsim/observables.hpp"
#include "support.hpp"

using namespace ptsim;

namespace {

const double kLn2 = std::log(2.0);

// Signalling violation by state-vector arithmetic: B's bias is
// [c1 - c2] / (c1 + c2) with c_k the squared norm of column k of G~ after
// the local operation, so s.v. = 2 (c2 - c1) / (c1 + c2) for the Bell input.
double sv_oracle(const ComplexMatrix& g) {
  const double c1 = std::norm(g(0, 0)) + std::norm(g(1, 0));
  const double c2 = std::norm(g(0, 1)) + std::norm(g(1, 1));
  const double bias_identity = (c1 - c2) / (c1 + c2);
  const double bias_swap = (c2 - c1) / (c1 + c2);
  return bias_swap - bias_identity;
}

} // namespace

TEST(DensityMatrix, Validation) {
  EXPECT_THROW(DensityMatrix::from_matrix(ComplexMatrix{{0.5, 0.0}, {0.0, 0.6}}), InvalidDensity);
  EXPECT_THROW(DensityMatrix::from_matrix(ComplexMatrix{{0.5, 1.0}, {0.0, 0.5}}), InvalidDensity);
  EXPECT_THROW(DensityMatrix::from_matrix(ComplexMatrix{{1.5, 0.0}, {0.0, -0.5}}), InvalidDensity);
  EXPECT_THROW(DensityMatrix::from_matrix(ComplexMatrix(2, 3)), DimensionMismatch);
}

TEST(EvolveDensity, IdentityAndTransfer) {
  const auto rho0 = DensityMatrix::basis_state(4, 0);
  EXPECT_LT(max_abs_diff(evolve_density(ComplexMatrix::identity(4), rho0).matrix(), rho0.matrix()), 1e-16);
  const auto rho = evolve_density(dilate(PTModel(2, 0.0), std::numbers::pi / 2.0).matrix(), rho0);
  EXPECT_NEAR(rho.population(1), 1.0, 1e-14);
  EXPECT_THROW(evolve_density(ComplexMatrix::identity(3), rho0), DimensionMismatch);
}

TEST(EvolveDensity, PreservesTraceForRandomInputs) {
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix a = ptsim::testing::random_matrix(6, 6);
    ComplexMatrix m = a * a.adjoint();
    m = m / m.trace().real();
    const auto rho = evolve_density(dilate(PTModel(3, 1.5), 0.7 * k).matrix(), DensityMatrix::from_matrix(m));
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
  }
}

TEST(Reduce, TrivialCases) {
  const auto f = reduce(DensityMatrix::basis_state(4, 0), Side::Forward);
  EXPECT_DOUBLE_EQ(f.vacuum_population(), 0.0);
  EXPECT_DOUBLE_EQ(f.rho.population(1), 1.0);
  const auto r = reduce(DensityMatrix::basis_state(4, 3), Side::Forward);
  EXPECT_DOUBLE_EQ(r.vacuum_population(), 1.0);
}

TEST(Reduce, VacuumBookkeepingAndDecoherence) {
  const double g = 0.25;
  const PTModel m(2, g);
  const double tau = fundamental_period(m)->value;
  for (double t : {0.5 * tau, 0.17 * tau, 1.3 * tau}) {
    const auto rho = evolve_density(dilate(m, t).matrix(), DensityMatrix::basis_state(4, 0));
    for (Side side : {Side::Forward, Side::Reverse}) {
      const auto s = reduce(rho, side);
      double sum = s.vacuum_population();
      for (std::size_t k = 1; k <= 2; ++k) sum += s.rho.population(k);
      EXPECT_NEAR(sum, 1.0, 1e-10);
      for (std::size_t k = 1; k <= 2; ++k) {
        EXPECT_LT(std::abs(s.rho.matrix()(0, k)), 1e-12);
        EXPECT_LT(std::abs(s.rho.matrix()(k, 0)), 1e-12);
      }
    }
    const auto fwd = reduce(rho, Side::Forward);
    EXPECT_NEAR(fwd.vacuum_population(), 1.0 - rho.population(0) - rho.population(1), 1e-12);
  }
}

TEST(RenormalizedForward, Cases) {
  const auto rho0 = DensityMatrix::basis_state(4, 0);
  EXPECT_LT(max_abs_diff(renormalized_forward(rho0).matrix(), ComplexMatrix::diagonal({1.0, 0.0})), 1e-16);
  const auto rho = evolve_density(dilate(PTModel(2, 0.0), 0.9).matrix(), rho0);
  EXPECT_LT(max_abs_diff(renormalized_forward(rho).matrix(), rho.matrix().block(0, 0, 2, 2)), 1e-14);
  EXPECT_THROW(renormalized_forward(DensityMatrix::basis_state(4, 2)), VanishingSupport);
}

TEST(Entropy, PureAndMaximallyMixed) {
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::basis_state(3, 1)), 0.0, 1e-15);
  const std::vector<cplx> psi{std::numbers::sqrt2 / 2, cplx(0.0, std::numbers::sqrt2 / 2)};
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::pure(psi)), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix::from_matrix(ComplexMatrix::diagonal({0.5, 0.5}))), kLn2, 1e-15);
}

TEST(Entropy, PeriodicInUnbrokenPhase) {
  ComplexMatrix m(4, 4);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  const auto rho0 = DensityMatrix::from_matrix(m);
  for (double g : {0.25, 0.5}) {
    const PTModel model(2, g);
    const double tau = fundamental_period(model)->value;
    auto s = [&](double t) { return von_neumann_entropy(renormalized_forward(evolve_density(dilate(model, t).matrix(), rho0))); };
    for (double t : {0.1, 0.9, 2.2}) EXPECT_NEAR(s(t), s(t + tau), 1e-6);
    EXPECT_LT(s(0.5 * tau), s(0.45 * tau));
    EXPECT_LT(s(0.5 * tau), s(0.55 * tau));
  }
}

TEST(SExpectation, Basics) {
  const double r = std::numbers::sqrt2 / 2;
  EXPECT_NEAR(s_expectation(DensityMatrix::pure(std::vector<cplx>{0.0, r, r})), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s_expectation(DensityMatrix::basis_state(3, 1)), 0.0);
  EXPECT_DOUBLE_EQ(s_expectation(DensityMatrix::from_matrix(ComplexMatrix::diagonal({0.5, 0.5, 0.0}))), 0.0);
  EXPECT_THROW(s_expectation(DensityMatrix::basis_state(4, 1)), DimensionMismatch);
}

TEST(SExpectation, ConstantOfMotionInHermitianRegime) {
  const double r = std::numbers::sqrt2 / 2;
  const auto rho0 = DensityMatrix::pure(std::vector<cplx>{r, cplx(0.0, r), 0.0, 0.0});
  const PTModel m(2, 0.0);
  const double s0 = s_expectation(reduce(rho0, Side::Forward).rho);
  for (double t : {0.3, 1.1, 2.9, 5.0})
    EXPECT_NEAR(s_expectation(reduce(evolve_density(dilate(m, t).matrix(), rho0), Side::Forward).rho), s0, 1e-9);
}

TEST(CoherentPairInput, Range) {
  EXPECT_NO_THROW(coherent_pair_input(0.0));
  EXPECT_NO_THROW(coherent_pair_input(0.5));
  EXPECT_THROW(coherent_pair_input(0.51), InvalidCoherence);
  EXPECT_THROW(coherent_pair_input(-0.01), InvalidCoherence);
}

TEST(Zitterbewegung, MixedInputVanishes) {
  std::vector<double> grid;
  for (int k = 0; k < 40; ++k) grid.push_back(0.25 * k);
  for (double g : {0.25, 1.1})
    for (const auto& p : zitterbewegung_series(PTModel(2, g), 0.0, grid)) {
      EXPECT_LT(std::abs(p.s_forward), 1e-10);
      EXPECT_LT(std::abs(p.s_reverse), 1e-10);
    }
}

TEST(Zitterbewegung, MixedAverageMatchesDensityEvolution) {
  const PTModel m(2, 0.25);
  for (double t : {0.4, 1.9, 3.3}) {
    const auto rho = evolve_density(dilate(m, t).matrix(), coherent_pair_input(0.0));
    const auto p = zitterbewegung_series(m, 0.0, std::vector<double>{t})[0];
    EXPECT_NEAR(p.s_forward, s_expectation(reduce(rho, Side::Forward).rho), 1e-12);
    EXPECT_NEAR(p.s_reverse, s_expectation(reduce(rho, Side::Reverse).rho), 1e-12);
  }
}

TEST(Zitterbewegung, AmplitudeGrowsWithCoherence) {
  std::vector<double> grid;
  const PTModel m(2, 0.25);
  const double tau = fundamental_period(m)->value;
  for (int k = 0; k <= 100; ++k) grid.push_back(2.0 * tau * k / 100.0);
  double previous = -1.0;
  for (double a : {0.0, 1.0 / 6.0, 1.0 / 3.0, 0.5}) {
    double amp = 0.0;
    for (const auto& p : zitterbewegung_series(m, a, grid)) amp = std::max(amp, std::abs(p.s_forward));
    EXPECT_GT(amp, previous);
    previous = amp;
  }
}

TEST(Zitterbewegung, BrokenPhaseSaturatesWithoutOscillation) {
  const PTModel m(2, 1.1);
  const double tp = fundamental_period(m)->value;
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(5.0 * tp * k / 200.0);
  const auto s = zitterbewegung_series(m, 0.5, grid);
  int sign_changes = 0;
  for (std::size_t k = 2; k < s.size(); ++k) {
    const double d1 = s[k].s_forward - s[k - 1].s_forward, d0 = s[k - 1].s_forward - s[k - 2].s_forward;
    if (d1 * d0 < 0.0 && std::abs(d1) > 1e-9) ++sign_changes;
  }
  EXPECT_LE(sign_changes, 1);
  EXPECT_LT(std::abs(s.back().s_forward - s[s.size() - 11].s_forward), 1e-3);
}

TEST(Zitterbewegung, RequiresTwoModes) {
  const std::vector<double> grid{0.0};
  EXPECT_THROW(zitterbewegung_series(PTModel(3, 0.1), 0.2, grid), InvalidModel);
}

TEST(SignallingViolation, ZeroInHermitianRegime) {
  for (double t : {0.2, 1.0, 3.7}) EXPECT_EQ(signalling_violation(PTModel(2, 0.0), t), 0.0);
}

TEST(SignallingViolation, MatchesStateVectorOracle) {
  for (double g : {0.1, 0.5, 0.9, 1.0, 1.4})
    for (double t : {0.3, 1.0, 2.2, 6.0}) {
      const PTModel m(2, g);
      EXPECT_NEAR(signalling_violation(m, t), sv_oracle(normalize(m, t).g_tilde), 1e-12) << g << " " << t;
    }
}

TEST(SignallingViolation, GoldenValues) {
  // Frozen from the density-matrix route; cross-checked against the
  // state-vector oracle above and an independent scipy evaluation.
  const double tau = std::numbers::pi / std::sqrt(0.75);
  EXPECT_NEAR(signalling_violation(PTModel(2, 0.5), tau / 4.0), -0.8660254037844386, 1e-12);
  EXPECT_NEAR(signalling_violation(PTModel(2, 0.5), 1.0), -0.82180366097522384, 1e-12);
  EXPECT_NEAR(signalling_violation(PTModel(2, 0.25), 1.0), -0.44222671848157713, 1e-12);
  EXPECT_NEAR(signalling_violation(PTModel(2, 0.75), 1.0), -1.1158423291012485, 1e-12);
  // G(tau / 2) is proportional to H and G(tau) = -I: no bias at either time.
  EXPECT_NEAR(signalling_violation(PTModel(2, 0.5), tau / 2.0), 0.0, 1e-13);
  EXPECT_NEAR(signalling_violation(PTModel(2, 0.5), tau), 0.0, 1e-13);
}

TEST(SignallingViolation, Errors) {
  EXPECT_THROW(signalling_violation(PTModel(3, 0.5), 1.0), InvalidModel);
  EXPECT_THROW(signalling_violation(PTModel(2, 0.5), 0.0), SpecError);
  EXPECT_THROW(signalling_violation_ep_limit(PTModel(2, 0.5)), SpecError);
  EXPECT_NEAR(signalling_violation_ep_limit(PTModel(2, 1.0)), 0.0, 1e-15);
}

TEST(SingleParticleSeries, HermitianVacuumIsZero) {
  std::vector<double> grid;
  for (int k = 0; k < 30; ++k) grid.push_back(0.2 * k);
  const auto rows = single_particle_series(PTModel(2, 0.0), single_photon_preset("1F", 2), grid);
  for (const auto& r : rows) {
    EXPECT_LT(r.forward_basis[0], 1e-12);
    EXPECT_NEAR(r.forward_basis[1], std::pow(std::cos(r.t), 2), 1e-9);
    EXPECT_NEAR(r.forward_basis[0] + r.forward_basis[1] + r.forward_basis[2], 1.0, 1e-12);
  }
}

TEST(SingleParticleSeries, BrokenPhaseReachesSteadyState) {
  const PTModel m(2, 1.1);
  const double tp = fundamental_period(m)->value;
  const std::vector<double> grid{4.5 * tp, 4.75 * tp, 5.0 * tp};
  const auto rows = single_particle_series(m, single_photon_preset("1F", 2), grid);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(std::abs(rows[2].modes[k] - rows[0].modes[k]), 1e-3);
}

TEST(SingleParticleSeries, InputValidation) {
  const std::vector<double> grid{0.0};
  EXPECT_THROW(single_particle_series(PTModel(2, 0.1), std::vector<cplx>{1.0, 0.0}, grid), DimensionMismatch);
  EXPECT_THROW(single_particle_series(PTModel(2, 0.1), std::vector<cplx>{1.0, 1.0, 0.0, 0.0}, grid), SpecError);
  EXPECT_THROW(single_photon_preset("psi1", 2), SpecError);
  EXPECT_THROW(single_photon_preset("4F", 3), SpecError);
  EXPECT_THROW(single_photon_preset("bogus", 3), SpecError);
}

TEST(AppendixF, PsiRelations) {
  const PTModel m(3, std::numbers::sqrt2 / 2.0);
  const auto psi1 = single_photon_preset("psi1", 3);
  const auto psi2 = single_photon_preset("psi2", 3);
  const auto psi3 = single_photon_preset("psi3", 3);
  for (double t : {0.3, 1.4, 2.8, 5.5}) {
    const auto u_plus = dilate(m, t).matrix();
    const auto u_minus = dilate(m, -t).matrix();
    const auto a1_minus = u_minus.apply(psi1);
    const auto a2 = u_plus.apply(psi2);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(std::abs(a2[k] - std::conj(a1_minus[2 - k])), 1e-9);
    const auto a1 = u_plus.apply(psi1);
    const auto a3 = u_plus.apply(psi3);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(std::abs(a3[3 + k] - std::conj(a1[k])), 1e-9);
  }
}
