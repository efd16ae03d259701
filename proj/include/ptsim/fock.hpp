#pragma once

// Multi-photon transport through a linear-optical unitary: occupation
// patterns, permanents, transition probabilities, normalisation filters and
// the pseudo-number-resolving detection model.

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptsim/errors.hpp"
#include "ptsim/linalg.hpp"
#include "ptsim/tolerances.hpp"

namespace ptsim {

/// Photon count per optical mode.
struct OccupationPattern {
  std::vector<int> occupations;

  OccupationPattern() = default;
  explicit OccupationPattern(std::vector<int> occ) : occupations(std::move(occ)) {
    for (int n : occupations)
      if (n < 0) throw SpecError("negative photon number in occupation pattern");
  }
  OccupationPattern(std::initializer_list<int> occ) : OccupationPattern(std::vector<int>(occ)) {}

  std::size_t modes() const noexcept { return occupations.size(); }
  int total() const noexcept { return std::accumulate(occupations.begin(), occupations.end(), 0); }
  int operator[](std::size_t i) const { return occupations[i]; }

  /// "n1,n2,...", the key used in serialized distributions.
  std::string key() const {
    std::string out;
    for (std::size_t i = 0; i < occupations.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(occupations[i]);
    }
    return out;
  }

  auto operator<=>(const OccupationPattern&) const = default;
  bool operator==(const OccupationPattern&) const = default;
};

/// Reverses the mode order inside each consecutive block of `block` modes.
/// With block = N this is the parity operator applied to the forward and
/// reverse subsystems separately.
inline OccupationPattern parity_image(const OccupationPattern& p, std::size_t block) {
  if (block == 0 || p.modes() % block != 0) throw DimensionMismatch("pattern length not a multiple of block");
  std::vector<int> out(p.modes());
  for (std::size_t b = 0; b < p.modes(); b += block)
    for (std::size_t k = 0; k < block; ++k) out[b + k] = p[b + block - 1 - k];
  return OccupationPattern(std::move(out));
}

struct PatternConstraint {
  enum class Kind { Any, Antibunched, MaxPerMode };
  Kind kind = Kind::Any;
  int max_per_mode = 0; // only used by MaxPerMode

  static PatternConstraint any() { return {Kind::Any, 0}; }
  static PatternConstraint antibunched() { return {Kind::Antibunched, 1}; }
  static PatternConstraint at_most(int k) {
    if (k < 0) throw SpecError("max_per_mode must be >= 0");
    return {Kind::MaxPerMode, k};
  }

  int cap(int photons) const {
    switch (kind) {
    case Kind::Any: return photons;
    case Kind::Antibunched: return 1;
    case Kind::MaxPerMode: return max_per_mode;
    }
    return photons;
  }

  bool operator==(const PatternConstraint&) const = default;
};

/// All patterns with `photons` photons over `modes` modes satisfying the
/// constraint, in descending lexicographic order (so (1,0,0) precedes
/// (0,1,0)).
inline std::vector<OccupationPattern> enumerate_patterns(std::size_t modes, int photons,
                                                         PatternConstraint constraint) {
  if (modes < 1) throw SpecError("enumerate_patterns needs at least one mode");
  if (photons < 0) throw SpecError("photon number must be >= 0");
  const int cap = constraint.cap(photons);
  std::vector<OccupationPattern> out;
  std::vector<int> current(modes, 0);
  auto recurse = [&](auto&& self, std::size_t mode, int remaining) -> void {
    if (mode + 1 == modes) {
      if (remaining <= cap) {
        current[mode] = remaining;
        out.emplace_back(current);
      }
      return;
    }
    for (int n = std::min(cap, remaining); n >= 0; --n) {
      current[mode] = n;
      self(self, mode + 1, remaining - n);
    }
    current[mode] = 0;
  };
  recurse(recurse, 0, photons);
  return out;
}

inline constexpr std::size_t kMaxPermanentDim = 12;

/// Ryser's formula with Gray-code ordering of column subsets, O(2^n n).
inline cplx permanent(const ComplexMatrix& a) {
  if (!a.is_square()) throw DimensionMismatch("permanent needs a square matrix, got " + a.shape());
  const std::size_t n = a.rows();
  if (n > kMaxPermanentDim)
    throw TooLarge("permanent dimension " + std::to_string(n) + " exceeds " + std::to_string(kMaxPermanentDim));
  if (n == 0) return 1.0;

  std::vector<cplx> row_sums(n, cplx{});
  cplx total{};
  std::uint32_t gray = 0;
  const std::uint32_t subsets = 1u << n;
  for (std::uint32_t k = 1; k < subsets; ++k) {
    const int j = std::countr_zero(k);
    gray ^= 1u << j;
    const bool added = (gray >> j) & 1u;
    for (std::size_t i = 0; i < n; ++i) row_sums[i] += added ? a(i, j) : -a(i, j);
    cplx prod = 1.0;
    for (const auto& s : row_sums) prod *= s;
    total += (std::popcount(gray) % 2 == 0) ? prod : -prod;
  }
  return (n % 2 == 0) ? total : -total;
}

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

inline void require_pattern_fits(const ComplexMatrix& u, const OccupationPattern& p) {
  if (p.modes() != u.rows())
    throw DimensionMismatch("pattern has " + std::to_string(p.modes()) + " modes, unitary has " +
                            std::to_string(u.rows()));
}

inline void require_unitary(const ComplexMatrix& u) {
  if (!u.is_square()) throw DimensionMismatch("transfer matrix must be square");
  const double r = unitarity_residual(u);
  if (r > tolerances().unitary_input)
    throw NotUnitary("|U U^dag - I|_max = " + detail::num(r));
}

inline cplx transition_amplitude_unchecked(const ComplexMatrix& u, const OccupationPattern& in,
                                           const OccupationPattern& out) {
  std::vector<std::size_t> cols, rows;
  double norm = 1.0;
  for (std::size_t i = 0; i < in.modes(); ++i) {
    cols.insert(cols.end(), static_cast<std::size_t>(in[i]), i);
    norm *= factorial(in[i]);
  }
  for (std::size_t j = 0; j < out.modes(); ++j) {
    rows.insert(rows.end(), static_cast<std::size_t>(out[j]), j);
    norm *= factorial(out[j]);
  }
  ComplexMatrix sub(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) sub(r, c) = u(rows[r], cols[c]);
  return permanent(sub) / std::sqrt(norm);
}

} // namespace detail

/// Amplitude <out| U |in> on the Fock space, per(U_sub) / sqrt(prod s! prod t!).
inline cplx transition_amplitude(const ComplexMatrix& u, const OccupationPattern& in,
                                 const OccupationPattern& out) {
  detail::require_unitary(u);
  detail::require_pattern_fits(u, in);
  detail::require_pattern_fits(u, out);
  if (in.total() != out.total())
    throw PhotonMismatch("input has " + std::to_string(in.total()) + " photons, output has " +
                         std::to_string(out.total()));
  return detail::transition_amplitude_unchecked(u, in, out);
}

inline double transition_prob(const ComplexMatrix& u, const OccupationPattern& in, const OccupationPattern& out) {
  return std::norm(transition_amplitude(u, in, out));
}

/// The set of output patterns a distribution is normalised over: patterns
/// obeying `constraint` with every photon inside the first `support_modes`
/// modes (0 means all modes).
struct PatternFilter {
  PatternConstraint constraint = PatternConstraint::any();
  std::size_t support_modes = 0;

  static PatternFilter all(PatternConstraint c = PatternConstraint::any()) { return {c, 0}; }
  static PatternFilter leading(std::size_t modes, PatternConstraint c) { return {c, modes}; }

  std::vector<OccupationPattern> patterns(std::size_t modes, int photons) const {
    const std::size_t support = support_modes == 0 ? modes : support_modes;
    if (support > modes) throw DimensionMismatch("filter support exceeds mode count");
    auto inner = enumerate_patterns(support, photons, constraint);
    if (support == modes) return inner;
    std::vector<OccupationPattern> out;
    out.reserve(inner.size());
    for (auto& p : inner) {
      auto occ = std::move(p.occupations);
      occ.resize(modes, 0);
      out.emplace_back(std::move(occ));
    }
    return out;
  }

  bool operator==(const PatternFilter&) const = default;
};

struct FockDistribution {
  std::vector<std::pair<OccupationPattern, double>> entries;
  PatternFilter filter;

  double probability(const OccupationPattern& p) const {
    for (const auto& [q, prob] : entries)
      if (q == p) return prob;
    return 0.0;
  }
  double total() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.second;
    return s;
  }
};

/// Output statistics of `input` through `u`, renormalised over the filter set.
/// Throws EmptyFilter when the filter set carries (numerically) no weight.
inline FockDistribution filtered_distribution(const ComplexMatrix& u, const OccupationPattern& input,
                                              const PatternFilter& filter) {
  detail::require_unitary(u);
  detail::require_pattern_fits(u, input);
  FockDistribution dist{{}, filter};
  double total = 0.0;
  for (auto& p : filter.patterns(u.rows(), input.total())) {
    const double prob = std::norm(detail::transition_amplitude_unchecked(u, input, p));
    total += prob;
    dist.entries.emplace_back(std::move(p), prob);
  }
  if (total <= tolerances().empty_filter)
    throw EmptyFilter("filtered probability mass " + detail::num(total));
  for (auto& e : dist.entries) e.second /= total;
  return dist;
}

// ---------------------------------------------------------------------------
// Pseudo-number-resolving detection: each tapped output mode is split by a
// 50:50 fibre beamsplitter onto two binary detectors with efficiencies
// (nu_1, nu_2).

struct SplitCount {
  int first = 0;
  int second = 0;
  bool operator==(const SplitCount&) const = default;
};

/// Click pattern ((n11, n12), (n21, n22), ...) over the tapped modes.
using SplitDetection = std::vector<SplitCount>;

class CalibrationModel {
public:
  explicit CalibrationModel(std::vector<std::pair<double, double>> efficiencies)
      : efficiencies_(std::move(efficiencies)) {
    for (const auto& [a, b] : efficiencies_)
      if (!(a > 0.0 && a <= 1.0) || !(b > 0.0 && b <= 1.0))
        throw SpecError("detector efficiencies must lie in (0, 1]");
  }

  static CalibrationModel uniform(std::size_t tapped_modes, double nu = 1.0) {
    return CalibrationModel(std::vector<std::pair<double, double>>(tapped_modes, {nu, nu}));
  }

  std::size_t tapped_modes() const noexcept { return efficiencies_.size(); }
  const std::pair<double, double>& operator[](std::size_t i) const { return efficiencies_[i]; }

private:
  std::vector<std::pair<double, double>> efficiencies_;
};

/// Gamma = prod_i nu_{i,1}^{n_{i,1}} nu_{i,2}^{n_{i,2}} (n_{i,1} + n_{i,2})!
inline double calibration_factor(const SplitDetection& detection, const CalibrationModel& cal) {
  if (detection.size() != cal.tapped_modes())
    throw InvalidDetection("detection covers " + std::to_string(detection.size()) + " modes, calibration " +
                           std::to_string(cal.tapped_modes()));
  double gamma = 1.0;
  for (std::size_t i = 0; i < detection.size(); ++i) {
    const auto [n1, n2] = detection[i];
    if (n1 < 0 || n1 > 1 || n2 < 0 || n2 > 1) throw InvalidDetection("binary detectors register 0 or 1 clicks");
    gamma *= std::pow(cal[i].first, n1) * std::pow(cal[i].second, n2) * detail::factorial(n1 + n2);
  }
  return gamma;
}

inline OccupationPattern occupation_of(const SplitDetection& d) {
  std::vector<int> occ;
  occ.reserve(d.size());
  for (const auto& s : d) occ.push_back(s.first + s.second);
  return OccupationPattern(std::move(occ));
}

struct DetectionCount {
  SplitDetection split;
  double count = 0.0;
};

/// Divides each count by its calibration factor.
inline std::vector<DetectionCount> calibrate(std::span<const DetectionCount> raw, const CalibrationModel& cal) {
  std::vector<DetectionCount> out(raw.begin(), raw.end());
  for (auto& d : out) d.count /= calibration_factor(d.split, cal);
  return out;
}

/// Groups split patterns by the occupation they resolve to and averages the
/// counts inside each group.
inline std::map<OccupationPattern, double> equivalent_pattern_classes(std::span<const DetectionCount> detections) {
  std::map<OccupationPattern, std::pair<double, int>> acc;
  for (const auto& d : detections) {
    auto& slot = acc[occupation_of(d.split)];
    slot.first += d.count;
    slot.second += 1;
  }
  std::map<OccupationPattern, double> out;
  for (const auto& [p, s] : acc) out.emplace(p, s.first / s.second);
  return out;
}

/// Expected click counts for `shots` heralded events drawn from `dist`
/// (patterns over at least cal.tapped_modes() modes). Patterns with photons
/// outside the tapped modes or with more than two photons in one mode cannot
/// produce a full coincidence and are omitted.
inline std::vector<DetectionCount> expected_detections(const FockDistribution& dist, const CalibrationModel& cal,
                                                       double shots) {
  const std::size_t tapped = cal.tapped_modes();
  std::vector<DetectionCount> out;
  for (const auto& [pattern, prob] : dist.entries) {
    bool resolvable = pattern.modes() >= tapped;
    for (std::size_t i = 0; i < pattern.modes() && resolvable; ++i)
      if ((i >= tapped && pattern[i] != 0) || pattern[i] > 2) resolvable = false;
    if (!resolvable) continue;
    // Enumerate the split patterns that resolve to `pattern`.
    std::vector<SplitDetection> splits{SplitDetection{}};
    for (std::size_t i = 0; i < tapped; ++i) {
      std::vector<SplitDetection> next;
      const int n = pattern[i];
      std::vector<SplitCount> options;
      if (n == 0) options = {{0, 0}};
      else if (n == 1) options = {{1, 0}, {0, 1}};
      else options = {{1, 1}};
      for (const auto& s : splits)
        for (const auto& o : options) {
          auto extended = s;
          extended.push_back(o);
          next.push_back(std::move(extended));
        }
      splits = std::move(next);
    }
    for (auto& s : splits) {
      // 50:50 splitting: a single photon picks either detector with p = 1/2,
      // a photon pair separates with p = 1/2.
      double weight = shots * prob;
      for (std::size_t i = 0; i < tapped; ++i) {
        const int n = s[i].first + s[i].second;
        if (n > 0) weight *= 0.5;
        weight *= std::pow(cal[i].first, s[i].first) * std::pow(cal[i].second, s[i].second);
      }
      out.push_back({std::move(s), weight});
    }
  }
  return out;
}

/// Calibrates, averages equivalent split patterns and normalises to unit sum.
inline std::map<OccupationPattern, double> reconstruct_probabilities(std::span<const DetectionCount> raw,
                                                                    const CalibrationModel& cal) {
  const auto calibrated = calibrate(raw, cal);
  auto classes = equivalent_pattern_classes(calibrated);
  double total = 0.0;
  for (const auto& [p, c] : classes) total += c;
  if (total <= 0.0) throw EmptyFilter("no calibrated counts");
  for (auto& [p, c] : classes) c /= total;
  return classes;
}

} // namespace ptsim
