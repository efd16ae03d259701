#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "ptsim/dilation.hpp"
#include "ptsim/fock.hpp"
#include "support.hpp"

using namespace ptsim;
using ptsim::testing::haar_unitary;
using ptsim::testing::permanent_bruteforce;
using ptsim::testing::random_matrix;

namespace {

// Exhaustive oracle: all vectors in {0..photons}^modes with the right sum,
// filtered, in descending lexicographic order.
std::vector<std::vector<int>> brute_patterns(std::size_t modes, int photons, int cap) {
  std::vector<std::vector<int>> out;
  std::vector<int> v(modes, 0);
  std::size_t total = 1;
  for (std::size_t i = 0; i < modes; ++i) total *= static_cast<std::size_t>(photons + 1);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    int sum = 0, mx = 0;
    for (std::size_t i = 0; i < modes; ++i) {
      v[modes - 1 - i] = static_cast<int>(c % static_cast<std::size_t>(photons + 1));
      c /= static_cast<std::size_t>(photons + 1);
    }
    for (int x : v) {
      sum += x;
      mx = std::max(mx, x);
    }
    if (sum == photons && mx <= cap) out.push_back(v);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

const ComplexMatrix kSplitter{{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2},
                              {std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2}};

} // namespace

TEST(EnumeratePatterns, SinglePhoton) {
  const auto p = enumerate_patterns(3, 1, PatternConstraint::any());
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], (OccupationPattern{1, 0, 0}));
  EXPECT_EQ(p[1], (OccupationPattern{0, 1, 0}));
  EXPECT_EQ(p[2], (OccupationPattern{0, 0, 1}));
}

TEST(EnumeratePatterns, Counts) {
  EXPECT_EQ(enumerate_patterns(6, 2, PatternConstraint::antibunched()).size(), 15u);
  EXPECT_EQ(enumerate_patterns(3, 3, PatternConstraint::at_most(2)).size(), 7u);
  EXPECT_EQ(enumerate_patterns(3, 3, PatternConstraint::any()).size(), 10u);
  EXPECT_EQ(enumerate_patterns(4, 0, PatternConstraint::any()).size(), 1u);
}

TEST(EnumeratePatterns, MatchesExhaustiveOracle) {
  for (std::size_t modes = 1; modes <= 5; ++modes)
    for (int photons = 0; photons <= 4; ++photons)
      for (int cap : {1, 2, photons}) {
        const auto got = enumerate_patterns(modes, photons, PatternConstraint::at_most(cap));
        const auto want = brute_patterns(modes, photons, cap);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t k = 0; k < got.size(); ++k) EXPECT_EQ(got[k].occupations, want[k]);
      }
}

TEST(Permanent, Trivial) {
  EXPECT_EQ(permanent(ComplexMatrix{{cplx(2.0, -1.0)}}), cplx(2.0, -1.0));
  EXPECT_EQ(permanent(ComplexMatrix{{1.0, 1.0}, {1.0, 1.0}}), cplx(2.0));
  EXPECT_EQ(permanent(ComplexMatrix(0, 0)), cplx(1.0));
}

TEST(Permanent, MatchesPermutationSum) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto a = random_matrix(n, n);
    const cplx ref = permanent_bruteforce(a);
    EXPECT_LT(std::abs(permanent(a) - ref) / std::abs(ref), 1e-10) << "n=" << n;
  }
}

TEST(Permanent, TooLarge) { EXPECT_THROW(permanent(ComplexMatrix(13, 13)), TooLarge); }

TEST(Permanent, DimensionTenIsFast) {
  const auto a = random_matrix(10, 10);
  const auto start = std::chrono::steady_clock::now();
  const cplx p = permanent(a);
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  EXPECT_TRUE(std::isfinite(p.real()));
  EXPECT_LT(ms, 50.0);
}

TEST(TransitionProb, SinglePhotonIsMatrixElement) {
  const auto u = haar_unitary(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<int> in(4, 0), out(4, 0);
      in[i] = 1;
      out[j] = 1;
      EXPECT_NEAR(transition_prob(u, OccupationPattern(in), OccupationPattern(out)), std::norm(u(j, i)), 1e-15);
    }
}

TEST(TransitionProb, HongOuMandelZero) {
  EXPECT_NEAR(transition_prob(kSplitter, {1, 1}, {1, 1}), 0.0, 1e-16);
  EXPECT_NEAR(transition_prob(kSplitter, {1, 1}, {2, 0}), 0.5, 1e-15);
}

TEST(TransitionProb, Errors) {
  EXPECT_THROW(transition_prob(kSplitter, {1, 1}, {1, 0}), PhotonMismatch);
  EXPECT_THROW(transition_prob(ComplexMatrix{{1.0, 1.0}, {0.0, 1.0}}, {1, 0}, {1, 0}), NotUnitary);
  EXPECT_THROW(transition_prob(kSplitter, {1, 0, 0}, {1, 0, 0}), DimensionMismatch);
}

TEST(TransitionProb, CompletenessForOmega1) {
  for (double t : {0.3, 1.7, 4.2}) {
    const auto u = dilate(PTModel(3, 0.0), t).matrix();
    const OccupationPattern in{1, 1, 0, 0, 0, 0};
    double total = 0.0;
    for (const auto& out : enumerate_patterns(6, 2, PatternConstraint::any())) total += transition_prob(u, in, out);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(FilteredDistribution, SinglePhotonMatchesColumn) {
  const auto u = dilate(PTModel(3, 0.9), 1.2).matrix();
  const auto d = filtered_distribution(u, {1, 0, 0, 0, 0, 0}, PatternFilter::all());
  ASSERT_EQ(d.entries.size(), 6u);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(d.entries[j].second, std::norm(u(j, 0)), 1e-14);
}

TEST(FilteredDistribution, Omega1AtZero) {
  const auto d = filtered_distribution(ComplexMatrix::identity(6), {1, 1, 0, 0, 0, 0},
                                       PatternFilter::all(PatternConstraint::antibunched()));
  EXPECT_EQ(d.entries.size(), 15u);
  EXPECT_DOUBLE_EQ(d.probability({1, 1, 0, 0, 0, 0}), 1.0);
  EXPECT_NEAR(d.total(), 1.0, 1e-15);
}

TEST(FilteredDistribution, HermitianMirrorAtHalfPeriod) {
  // G(T/2) = -P for N = 3 at gamma = 0, so the photons land on the mirrored modes.
  const PTModel m(3, 0.0);
  const double half = fundamental_period(m)->value / 2.0;
  const auto d = filtered_distribution(dilate(m, half).matrix(), {1, 1, 0, 0, 0, 0},
                                       PatternFilter::all(PatternConstraint::antibunched()));
  EXPECT_NEAR(d.probability({0, 1, 1, 0, 0, 0}), 1.0, 1e-12);
  EXPECT_NEAR(d.probability({1, 1, 0, 0, 0, 0}), 0.0, 1e-12);
}

TEST(FilteredDistribution, EmptyFilter) {
  // A photon pair that stays in the reverse half has no forward-only outcome.
  EXPECT_THROW(filtered_distribution(ComplexMatrix::identity(4), {0, 0, 1, 1},
                                     PatternFilter::leading(2, PatternConstraint::any())),
               EmptyFilter);
}

TEST(ParityImage, ReversesEachBlock) {
  EXPECT_EQ(parity_image({1, 1, 0, 0, 2, 0}, 3), (OccupationPattern{0, 1, 1, 0, 2, 0}));
  EXPECT_THROW(parity_image({1, 0, 0}, 2), DimensionMismatch);
}

TEST(CalibrationFactor, FormulaValues) {
  const auto ones = CalibrationModel::uniform(3, 1.0);
  EXPECT_DOUBLE_EQ(calibration_factor({{1, 0}, {0, 0}, {0, 0}}, ones), 1.0);
  EXPECT_DOUBLE_EQ(calibration_factor({{1, 1}, {0, 0}, {0, 0}}, ones), 2.0);
  EXPECT_DOUBLE_EQ(calibration_factor({{1, 1}, {0, 0}, {0, 0}}, CalibrationModel::uniform(3, 0.5)), 0.5);
}

TEST(CalibrationFactor, Errors) {
  EXPECT_THROW(CalibrationModel({{0.0, 1.0}}), SpecError);
  EXPECT_THROW(calibration_factor({{2, 0}, {0, 0}, {0, 0}}, CalibrationModel::uniform(3)), InvalidDetection);
  EXPECT_THROW(calibration_factor({{1, 0}}, CalibrationModel::uniform(3)), InvalidDetection);
}

TEST(EquivalentPatternClasses, AveragesSplitPatterns) {
  const std::vector<DetectionCount> raw{{{{1, 1}, {1, 0}, {0, 0}}, 10.0}, {{{1, 1}, {0, 1}, {0, 0}}, 14.0}};
  const auto classes = equivalent_pattern_classes(raw);
  ASSERT_EQ(classes.size(), 1u);
  EXPECT_DOUBLE_EQ(classes.at(OccupationPattern{2, 1, 0}), 12.0);
  EXPECT_TRUE(equivalent_pattern_classes(std::vector<DetectionCount>{}).empty());
  const std::vector<DetectionCount> single{{{{1, 0}, {0, 1}, {1, 0}}, 5.0}};
  EXPECT_DOUBLE_EQ(equivalent_pattern_classes(single).at(OccupationPattern{1, 1, 1}), 5.0);
}

TEST(Detection, ForwardModelRoundTrip) {
  // Synthesize mock click counts from an exact distribution with unequal
  // efficiencies, then invert: calibrate, average and renormalise.
  const PTModel m(3, 0.2);
  const auto dist = filtered_distribution(dilate(m, 2.1).matrix(), {1, 1, 1, 0, 0, 0},
                                          PatternFilter::leading(3, PatternConstraint::at_most(2)));
  const CalibrationModel cal({{0.9, 0.7}, {0.6, 0.8}, {0.75, 0.95}});
  const auto clicks = expected_detections(dist, cal, 1e6);
  const auto recovered = reconstruct_probabilities(clicks, cal);
  ASSERT_EQ(recovered.size(), dist.entries.size());
  for (const auto& [p, prob] : dist.entries) {
    const OccupationPattern tapped(std::vector<int>(p.occupations.begin(), p.occupations.begin() + 3));
    EXPECT_NEAR(recovered.at(tapped), prob / dist.total(), 1e-12) << p.key();
  }
}
