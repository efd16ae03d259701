#pragma once

// Figure-reproduction drivers behind the `ptsim run` command. Each experiment
// turns an ExperimentSpec into deterministic tables plus a JSON document;
// optional shot sampling draws multinomial counts from the exact rows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ptsim/dilation.hpp"
#include "ptsim/errors.hpp"
#include "ptsim/fock.hpp"
#include "ptsim/mesh.hpp"
#include "ptsim/observables.hpp"
#include "ptsim/pt_model.hpp"
#include "ptsim/serialize.hpp"

namespace ptsim {

inline constexpr std::string_view kLibraryVersion = "1.0.0";

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig2a",          "fig2b",           "fig2c-entropy", "fig2d-sv",
                                              "fig4-zitter",    "fig5-twophoton",  "fig5-threephoton",
                                              "appE",           "appF",            "mesh-compile"};
  return names;
}

struct ExperimentSpec {
  std::string name;
  std::optional<int> n_modes;
  std::vector<double> gammas; // empty: experiment default
  std::optional<double> t_start;
  std::optional<double> t_stop;
  int t_points = 61;
  std::optional<std::string> input;
  std::vector<double> coherence; // fig4 only; empty: {0, 1/6, 1/3, 1/2}
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  int bootstrap = 0; // resamples for percentile bands, needs shots

  void validate() const {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw UnknownExperiment("'" + name + "'");
    if (t_points < 2) throw SpecError("t-points must be >= 2");
    for (double g : gammas)
      if (!(g >= 0.0) || !std::isfinite(g)) throw SpecError("gamma values must be finite and >= 0");
    if (t_start.has_value() != t_stop.has_value()) throw SpecError("give both --t-start and --t-stop or neither");
    if (t_start && !(*t_stop >= *t_start)) throw SpecError("t-stop must be >= t-start");
    if (seed && (!shots || *shots == 0)) throw SpecError("shots must be > 0 when a seed is given");
    if (shots && !seed) throw SpecError("shot sampling needs --seed");
    if (bootstrap < 0) throw SpecError("bootstrap count must be >= 0");
    if (bootstrap > 0 && !shots) throw SpecError("bootstrap needs --shots");
    for (double a : coherence)
      if (!(a >= 0.0 && a <= 0.5)) throw SpecError("coherence values must lie in [0, 1/2]");
  }
};

inline ordered_json to_json(const ExperimentSpec& s) {
  ordered_json j;
  j["name"] = s.name;
  j["n"] = s.n_modes ? ordered_json(*s.n_modes) : ordered_json(nullptr);
  j["gamma"] = s.gammas;
  j["t_start"] = s.t_start ? ordered_json(*s.t_start) : ordered_json(nullptr);
  j["t_stop"] = s.t_stop ? ordered_json(*s.t_stop) : ordered_json(nullptr);
  j["t_points"] = s.t_points;
  j["input"] = s.input ? ordered_json(*s.input) : ordered_json(nullptr);
  j["coherence"] = s.coherence;
  j["seed"] = s.seed ? ordered_json(*s.seed) : ordered_json(nullptr);
  j["shots"] = s.shots ? ordered_json(*s.shots) : ordered_json(nullptr);
  j["bootstrap"] = s.bootstrap;
  return j;
}

struct ExperimentResult {
  std::vector<Table> tables;
  ordered_json document; // full-precision echo of every table plus extras
};

inline std::vector<double> linspace(double start, double stop, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    out[static_cast<std::size_t>(k)] = points == 1 ? start : start + (stop - start) * k / (points - 1);
  return out;
}

/// Parses "a", "bi", "a+bi", "a-bi" (also with 'j').
inline cplx parse_complex(std::string_view text) {
  std::string s(text);
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) throw SpecError("empty amplitude");
  auto parse_real = [&](const std::string& part) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size()) throw SpecError("malformed amplitude '" + s + "'");
    return v;
  };
  const char last = s.back();
  if (last != 'i' && last != 'j') return parse_real(s);
  const std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;)
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  auto imag_of = [&](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    return parse_real(part);
  };
  if (split == std::string::npos) return {0.0, imag_of(body)};
  return {parse_real(body.substr(0, split)), imag_of(body.substr(split))};
}

/// A preset name or a comma-separated amplitude list over the 2N modes.
inline std::vector<cplx> parse_single_photon_input(const std::string& text, int n_modes) {
  if (text.find(',') == std::string::npos) return single_photon_preset(text, n_modes);
  std::vector<cplx> psi;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    psi.push_back(parse_complex(std::string_view(text).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (psi.size() != static_cast<std::size_t>(2 * n_modes))
    throw SpecError("amplitude list needs " + std::to_string(2 * n_modes) + " entries");
  require_normalized(psi);
  return psi;
}

/// omega1, omega2, chi1, or "occ:n1,n2,..." over the 2N modes.
inline OccupationPattern parse_fock_input(const std::string& text, int n_modes) {
  const auto n = static_cast<std::size_t>(n_modes);
  std::vector<int> occ(2 * n, 0);
  if (text == "omega1" || text == "omega2" || text == "chi1") {
    if (n_modes != 3) throw SpecError(text + " is defined for N = 3");
    if (text == "omega1") occ = {1, 1, 0, 0, 0, 0};
    if (text == "omega2") occ = {0, 1, 1, 0, 0, 0};
    if (text == "chi1") occ = {1, 1, 1, 0, 0, 0};
    return OccupationPattern(occ);
  }
  if (text.rfind("occ:", 0) == 0) {
    auto p = pattern_from_key(text.substr(4));
    if (p.modes() != 2 * n) throw SpecError("occupation input needs " + std::to_string(2 * n) + " entries");
    return p;
  }
  throw SpecError("unknown Fock input '" + text + "'");
}

namespace detail {

inline std::string gamma_label(double g) { return format_number(g, 12); }

/// Time grid for one gamma: the user's grid if given, otherwise [0, 2 tau]
/// in periodic regimes and [0, 5 tau'] in broken ones. Exceptional points
/// have no natural scale and need an explicit grid.
inline std::vector<double> default_grid(const ExperimentSpec& s, const PTModel& m) {
  if (s.t_start) return linspace(*s.t_start, *s.t_stop, s.t_points);
  const auto period = fundamental_period(m);
  if (!period) {
    throw SpecError("gamma = " + gamma_label(m.gamma()) +
                    " has no closed-form time scale (exceptional point or N > 3); pass --t-start/--t-stop");
  }
  return linspace(0.0, period->periodic ? 2.0 * period->value : 5.0 * period->value, s.t_points);
}

inline void check_distributions(const Table& t) {
  for (const auto& row : t.rows)
    for (const auto& [b, e] : t.distributions) {
      double sum = 0.0;
      for (std::size_t c = b; c < e; ++c) sum += row[c];
      if (std::abs(sum - 1.0) > 1e-9)
        throw NumericalError("probability row in '" + t.name + "' sums to " + format_number(sum, 17));
    }
}

inline std::string occupation_label(const OccupationPattern& p) {
  std::string s;
  for (int v : p.occupations) s += std::to_string(v);
  return s;
}

inline PTModel model_for(const ExperimentSpec& s, int default_n, double gamma) {
  return PTModel(s.n_modes.value_or(default_n), gamma);
}

inline std::vector<double> gammas_or(const ExperimentSpec& s, std::vector<double> fallback) {
  return s.gammas.empty() ? fallback : s.gammas;
}

inline ordered_json tables_json(const std::vector<Table>& tables) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : tables) arr.push_back(to_json(t));
  return arr;
}

// fig2a, fig2b: forward basis (vac, 1, ..., N); appE: all 2N modes.
inline ExperimentResult run_single_particle(const ExperimentSpec& s, std::vector<double> default_gammas,
                                            bool mode_resolved) {
  ExperimentResult r;
  const std::vector<double> gammas = gammas_or(s, std::move(default_gammas));
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const PTModel m = model_for(s, 2, gammas[gi]);
    const auto n = static_cast<std::size_t>(m.n_modes());
    const auto psi = parse_single_photon_input(s.input.value_or("1F"), m.n_modes());
    const auto grid = default_grid(s, m);
    Table t;
    t.name = s.name + "_g" + std::to_string(gi);
    t.columns = {"t"};
    if (mode_resolved) {
      for (std::size_t k = 1; k <= n; ++k) t.columns.push_back("P_F" + std::to_string(k));
      for (std::size_t k = 1; k <= n; ++k) t.columns.push_back("P_R" + std::to_string(k));
    } else {
      t.columns.push_back("P_vac");
      for (std::size_t k = 1; k <= n; ++k) t.columns.push_back("P_" + std::to_string(k));
    }
    t.distributions = {{1, t.columns.size()}};
    for (const auto& row : single_particle_series(m, psi, grid)) {
      std::vector<double> out{row.t};
      const auto& src = mode_resolved ? row.modes : row.forward_basis;
      out.insert(out.end(), src.begin(), src.end());
      t.rows.push_back(std::move(out));
    }
    r.tables.push_back(std::move(t));
  }
  r.document["gamma"] = gammas;
  return r;
}

inline ExperimentResult run_entropy(const ExperimentSpec& s) {
  ExperimentResult r;
  const auto gammas = gammas_or(s, {0.25, 0.5, 1.1});
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const PTModel m = model_for(s, 2, gammas[gi]);
    if (m.n_modes() != 2) throw SpecError("fig2c-entropy is defined for N = 2");
    const auto grid = default_grid(s, m);
    const auto period = fundamental_period(m);
    Table t;
    t.name = s.name + "_g" + std::to_string(gi);
    t.columns = {"t", "t_over_tau", "S"};
    ComplexMatrix rho0(4, 4);
    rho0(0, 0) = 0.5;
    rho0(1, 1) = 0.5;
    const auto rho_in = DensityMatrix::from_matrix(rho0);
    for (double time : grid) {
      const auto rho = evolve_density(dilate(m, time).matrix(), rho_in);
      const double scaled = period ? time / period->value : std::nan("");
      t.rows.push_back({time, scaled, von_neumann_entropy(renormalized_forward(rho))});
    }
    r.tables.push_back(std::move(t));
  }
  r.document["gamma"] = gammas;
  return r;
}

inline ExperimentResult run_signalling(const ExperimentSpec& s) {
  ExperimentResult r;
  std::vector<double> gammas = s.gammas;
  if (gammas.empty())
    for (int k = 0; k <= 40; ++k) gammas.push_back(0.05 * k);
  Table t;
  t.name = s.name;
  t.columns = {"gamma", "t", "sv"};
  std::vector<double> skipped;
  for (double g : gammas) {
    const PTModel m = model_for(s, 2, g);
    if (std::abs(g - 1.0) < 1e-3) {
      skipped.push_back(g);
      continue;
    }
    const double time = std::numbers::pi / std::sqrt(std::abs(1.0 - g * g));
    t.rows.push_back({g, time, signalling_violation(m, time)});
  }
  r.tables.push_back(std::move(t));
  r.document["excluded_gamma"] = skipped;
  r.document["ep_limit"] = {{"gamma", 1.0},
                            {"t", "infinity"},
                            {"sv", signalling_violation_ep_limit(PTModel(2, 1.0))},
                            {"note", "extrapolated from the rank-1 limit of the normalised propagator"}};
  return r;
}

inline ExperimentResult run_zitter(const ExperimentSpec& s) {
  ExperimentResult r;
  const auto gammas = gammas_or(s, {0.25, 1.1});
  const std::vector<double> coherence =
      s.coherence.empty() ? std::vector<double>{0.0, 1.0 / 6.0, 1.0 / 3.0, 0.5} : s.coherence;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const PTModel m = model_for(s, 2, gammas[gi]);
    const auto grid = default_grid(s, m);
    Table t;
    t.name = s.name + "_g" + std::to_string(gi);
    t.columns = {"t"};
    for (std::size_t k = 0; k < coherence.size(); ++k) {
      t.columns.push_back("S_F_a" + std::to_string(k));
      t.columns.push_back("S_R_a" + std::to_string(k));
    }
    t.rows.assign(grid.size(), {});
    for (std::size_t i = 0; i < grid.size(); ++i) t.rows[i].push_back(grid[i]);
    for (double a : coherence) {
      const auto series = zitterbewegung_series(m, a, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        t.rows[i].push_back(series[i].s_forward);
        t.rows[i].push_back(series[i].s_reverse);
      }
    }
    r.tables.push_back(std::move(t));
  }
  r.document["gamma"] = gammas;
  r.document["coherence"] = coherence;
  return r;
}

inline ExperimentResult run_multiphoton(const ExperimentSpec& s, bool three_photon) {
  ExperimentResult r;
  const double sq2 = std::numbers::sqrt2;
  const auto gammas = three_photon ? gammas_or(s, {0.0, 0.2, sq2 / 2.0})
                                   : gammas_or(s, {0.0, sq2 / 2.0, 3.0 * sq2 / 4.0, 1.1 * sq2});
  ordered_json distributions = ordered_json::array();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const PTModel m = model_for(s, 3, gammas[gi]);
    const auto n = static_cast<std::size_t>(m.n_modes());
    std::vector<std::string> inputs;
    if (s.input) inputs = {*s.input};
    else if (three_photon) inputs = {"chi1"};
    else inputs = {"omega1", "omega2"};
    const PatternFilter filter = three_photon ? PatternFilter::leading(n, PatternConstraint::at_most(2))
                                              : PatternFilter::all(PatternConstraint::antibunched());
    const auto grid = default_grid(s, m);
    Table t;
    t.name = s.name + "_g" + std::to_string(gi);
    t.columns = {"t"};
    t.rows.assign(grid.size(), {});
    for (std::size_t i = 0; i < grid.size(); ++i) t.rows[i].push_back(grid[i]);
    ordered_json per_gamma = ordered_json::array();
    for (const auto& name : inputs) {
      const auto input = parse_fock_input(name, m.n_modes());
      const std::size_t first = t.columns.size();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto dist = filtered_distribution(dilate(m, grid[i]).matrix(), input, filter);
        if (i == 0)
          for (const auto& e : dist.entries) t.columns.push_back(name + "_" + occupation_label(e.first));
        for (const auto& e : dist.entries) t.rows[i].push_back(e.second);
        per_gamma.push_back({{"input", name}, {"t", grid[i]}, {"distribution", to_json(dist)}});
      }
      t.distributions.emplace_back(first, t.columns.size());
    }
    distributions.push_back(std::move(per_gamma));
    r.tables.push_back(std::move(t));
  }
  r.document["gamma"] = gammas;
  r.document["distributions"] = std::move(distributions);
  return r;
}

inline ExperimentResult run_app_f(const ExperimentSpec& s) {
  ExperimentResult r;
  const double sq2 = std::numbers::sqrt2;
  const auto gammas = gammas_or(s, {sq2 / 2.0, 1.1 * sq2});
  const std::vector<std::string> inputs =
      s.input ? std::vector<std::string>{*s.input} : std::vector<std::string>{"psi1", "psi2", "psi3"};
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const PTModel m = model_for(s, 3, gammas[gi]);
    const auto n = static_cast<std::size_t>(m.n_modes());
    const auto grid = default_grid(s, m);
    Table t;
    t.name = s.name + "_g" + std::to_string(gi);
    t.columns = {"t"};
    t.rows.assign(grid.size(), {});
    for (std::size_t i = 0; i < grid.size(); ++i) t.rows[i].push_back(grid[i]);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const std::string label = inputs[k].find(',') == std::string::npos ? inputs[k] : "input";
      const std::size_t first = t.columns.size();
      for (std::size_t j = 1; j <= n; ++j) t.columns.push_back(label + "_F" + std::to_string(j));
      for (std::size_t j = 1; j <= n; ++j) t.columns.push_back(label + "_R" + std::to_string(j));
      t.distributions.emplace_back(first, t.columns.size());
      const auto series = single_particle_series(m, parse_single_photon_input(inputs[k], m.n_modes()), grid);
      for (std::size_t i = 0; i < grid.size(); ++i)
        t.rows[i].insert(t.rows[i].end(), series[i].modes.begin(), series[i].modes.end());
    }
    r.tables.push_back(std::move(t));
  }
  r.document["gamma"] = gammas;
  return r;
}

inline ExperimentResult run_mesh_compile(const ExperimentSpec& s) {
  ExperimentResult r;
  const auto gammas = gammas_or(s, {3.0 * std::numbers::sqrt2 / 4.0});
  // Without an explicit grid the program is compiled at t = 0 and t = 1 only.
  const auto grid = s.t_start ? linspace(*s.t_start, *s.t_stop, s.t_points) : linspace(0.0, 1.0, 2);
  Table t;
  t.name = s.name;
  t.columns = {"gamma", "t", "stages", "round_trip_error"};
  ordered_json programs = ordered_json::array();
  for (double g : gammas) {
    const PTModel m = model_for(s, 3, g);
    for (double time : grid) {
      const ComplexMatrix u = dilate(m, time).matrix();
      const MeshProgram p = reck_decompose(u);
      const double err = max_abs_diff(mesh_apply(p), u);
      if (err >= 1e-9) throw NumericalError("mesh round trip error " + format_number(err, 17));
      t.rows.push_back({g, time, static_cast<double>(p.stages.size()), err});
      programs.push_back({{"gamma", g}, {"t", time}, {"program", to_json(p)}});
    }
  }
  r.tables.push_back(std::move(t));
  r.document["programs"] = std::move(programs);
  return r;
}

} // namespace detail

/// Runs the exact-theory part of an experiment. Deterministic: identical
/// specs give identical tables.
inline ExperimentResult run(const ExperimentSpec& s) {
  s.validate();
  ExperimentResult r;
  if (s.name == "fig2a") r = detail::run_single_particle(s, {0.25, 0.0}, false);
  else if (s.name == "fig2b") r = detail::run_single_particle(s, {1.1}, false);
  else if (s.name == "appE") r = detail::run_single_particle(s, {0.25, 1.1}, true);
  else if (s.name == "fig2c-entropy") r = detail::run_entropy(s);
  else if (s.name == "fig2d-sv") r = detail::run_signalling(s);
  else if (s.name == "fig4-zitter") r = detail::run_zitter(s);
  else if (s.name == "fig5-twophoton") r = detail::run_multiphoton(s, false);
  else if (s.name == "fig5-threephoton") r = detail::run_multiphoton(s, true);
  else if (s.name == "appF") r = detail::run_app_f(s);
  else if (s.name == "mesh-compile") r = detail::run_mesh_compile(s);
  else throw UnknownExperiment("'" + s.name + "'");
  for (const auto& t : r.tables) detail::check_distributions(t);
  r.document["experiment"] = s.name;
  r.document["tables"] = detail::tables_json(r.tables);
  return r;
}

// -- Shot sampling ----------------------------------------------------------

/// Multinomial draw of `shots` events from `probs` by sequential binomials.
inline std::vector<std::uint64_t> multinomial(std::span<const double> probs, std::uint64_t shots,
                                              std::mt19937_64& rng) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double remaining_p = 1.0;
  std::uint64_t remaining = shots;
  for (std::size_t k = 0; k < probs.size() && remaining > 0; ++k) {
    if (k + 1 == probs.size()) {
      counts[k] = remaining;
      break;
    }
    const double p = remaining_p > 0.0 ? std::clamp(probs[k] / remaining_p, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, p);
    counts[k] = draw(rng);
    remaining -= counts[k];
    remaining_p -= probs[k];
  }
  return counts;
}

/// Count tables drawn from every probability group of every table in
/// `exact`: one multinomial sample of `shots` per row and group. With
/// bootstrap > 0 an extra table per input holds 2.5 / 97.5 percentile
/// frequency bands from resampling the counts.
inline std::vector<Table> sample(const ExperimentSpec& s, const ExperimentResult& exact) {
  if (!s.shots || !s.seed) throw SpecError("sampling needs shots and seed");
  std::vector<Table> out;
  std::mt19937_64 rng(*s.seed);
  for (const auto& t : exact.tables) {
    if (t.distributions.empty()) throw SpecError("experiment '" + s.name + "' has no probability tables to sample");
    Table counts{t.name + "_counts", {t.columns.front()}, {}, {}};
    Table bands{t.name + "_bootstrap", {t.columns.front()}, {}, {}};
    for (const auto& [b, e] : t.distributions)
      for (std::size_t c = b; c < e; ++c) {
        counts.columns.push_back(t.columns[c]);
        bands.columns.push_back(t.columns[c] + "_lo");
        bands.columns.push_back(t.columns[c] + "_hi");
      }
    for (const auto& row : t.rows) {
      std::vector<double> crow{row.front()}, brow{row.front()};
      for (const auto& [b, e] : t.distributions) {
        const std::span<const double> probs(row.data() + b, e - b);
        const auto drawn = multinomial(probs, *s.shots, rng);
        for (auto v : drawn) crow.push_back(static_cast<double>(v));
        if (s.bootstrap > 0) {
          std::vector<double> freq(drawn.size());
          for (std::size_t k = 0; k < drawn.size(); ++k) freq[k] = static_cast<double>(drawn[k]) / *s.shots;
          std::vector<std::vector<double>> resampled(drawn.size());
          for (int rep = 0; rep < s.bootstrap; ++rep) {
            const auto again = multinomial(freq, *s.shots, rng);
            for (std::size_t k = 0; k < again.size(); ++k)
              resampled[k].push_back(static_cast<double>(again[k]) / *s.shots);
          }
          for (auto& samples : resampled) {
            std::sort(samples.begin(), samples.end());
            auto pick = [&](double q) {
              const auto idx = static_cast<std::size_t>(std::floor(q * (samples.size() - 1) + 0.5));
              return samples[idx];
            };
            brow.push_back(pick(0.025));
            brow.push_back(pick(0.975));
          }
        }
      }
      counts.rows.push_back(std::move(crow));
      if (s.bootstrap > 0) bands.rows.push_back(std::move(brow));
    }
    out.push_back(std::move(counts));
    if (s.bootstrap > 0) out.push_back(std::move(bands));
  }
  return out;
}

} // namespace ptsim
