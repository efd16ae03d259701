// ptsim: command-line driver that writes figure data as CSV and JSON.
//
//   ptsim run <experiment> [--n N] [--gamma g1,g2,...] [--t-start a --t-stop b]
//             [--t-points K] [--input preset|amplitudes] [--coherence a1,...]
//             [--shots S --seed R [--bootstrap B]] --out <dir>
//
// Exit status: 0 success, 2 bad spec, 3 numerical invariant failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ptsim/experiments.hpp"

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ptsim::SpecError("cannot write " + path.string());
  out << text;
}

int run_experiment(const ptsim::ExperimentSpec& spec, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto result = ptsim::run(spec);
  std::vector<ptsim::Table> sampled;
  if (spec.shots) sampled = ptsim::sample(spec, result);

  fs::create_directories(out_dir);
  for (const auto& t : result.tables) write_file(out_dir / (t.name + ".csv"), ptsim::to_csv(t));
  for (const auto& t : sampled) write_file(out_dir / (t.name + ".csv"), ptsim::to_csv(t));
  ptsim::ordered_json doc = result.document;
  doc["spec"] = ptsim::to_json(spec);
  if (!sampled.empty()) doc["samples"] = ptsim::detail::tables_json(sampled);
  write_file(out_dir / (spec.name + ".json"), ptsim::to_json_text(doc));

  // Wall time lives in its own file so the data files stay byte-identical.
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ptsim::ordered_json meta;
  meta["version"] = std::string(ptsim::kLibraryVersion);
  meta["spec"] = ptsim::to_json(spec);
  meta["wall_time_seconds"] = seconds;
  write_file(out_dir / "metadata.json", ptsim::to_json_text(meta));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"PT-symmetric dilation simulator"};
  app.require_subcommand(1);
  auto* run_cmd = app.add_subcommand("run", "Compute one experiment and write its data files");

  ptsim::ExperimentSpec spec;
  int n = 0;
  double t_start = 0.0, t_stop = 0.0;
  std::string input;
  std::uint64_t shots = 0, seed = 0;
  std::string out_dir;
  run_cmd->add_option("experiment", spec.name, "Experiment name")->required();
  auto* n_opt = run_cmd->add_option("--n", n, "Modes per subsystem");
  run_cmd->add_option("--gamma", spec.gammas, "Gain/loss values")->delimiter(',');
  auto* start_opt = run_cmd->add_option("--t-start", t_start, "First time point");
  auto* stop_opt = run_cmd->add_option("--t-stop", t_stop, "Last time point");
  run_cmd->add_option("--t-points", spec.t_points, "Number of time points");
  auto* input_opt = run_cmd->add_option("--input", input, "Input preset or comma-separated amplitudes");
  run_cmd->add_option("--coherence", spec.coherence, "Coherence values for fig4-zitter")->delimiter(',');
  auto* shots_opt = run_cmd->add_option("--shots", shots, "Sampled events per time point");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Sampler seed");
  run_cmd->add_option("--bootstrap", spec.bootstrap, "Bootstrap resamples for percentile bands");
  run_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (const char* env = std::getenv("PTSIM_TOL"))
      ptsim::set_tolerances(ptsim::parse_tolerance_overrides(env, ptsim::tolerances()));
    if (*n_opt) spec.n_modes = n;
    if (*start_opt) spec.t_start = t_start;
    if (*stop_opt) spec.t_stop = t_stop;
    if (*input_opt) spec.input = input;
    if (*shots_opt) spec.shots = shots;
    if (*seed_opt) spec.seed = seed;
    return run_experiment(spec, out_dir);
  } catch (const ptsim::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ptsim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
