#include <chrono>
#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vibexc/constants.hpp"
#include "vibexc/doktorov.hpp"
#include "vibexc/dynamics.hpp"
#include "vibexc/errors.hpp"
#include "vibexc/excitation.hpp"
#include "vibexc/gaussian_state.hpp"
#include "vibexc/io.hpp"
#include "vibexc/sampler.hpp"

namespace {

using namespace vibexc;
using nlohmann::json;

// mode=beta with a 1-based mode index; beta is real (number statistics of a
// single displaced mode do not depend on its phase).
std::pair<Index, double> parse_pre_excite(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw ValidationError("--pre-excite expects mode=beta, got \"" + text + "\"");
  Index mode = 0;
  double beta = 0;
  try {
    size_t used = 0;
    mode = static_cast<Index>(std::stol(text.substr(0, eq), &used));
    if (used != eq) throw std::invalid_argument(text);
    beta = std::stod(text.substr(eq + 1), &used);
    if (used != text.size() - eq - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ValidationError("--pre-excite expects mode=beta, got \"" + text + "\"");
  }
  return {mode, beta};
}

// vacuum -> coherent pre-excitation of initial modes -> vibronic transition.
GaussianState<double> build_state(const DoktorovParamsd& params,
                                  const std::vector<std::string>& pre_excite_args,
                                  json& config_echo) {
  GaussianState<double> state = vacuum<double>(params.num_modes());
  json echo = json::array();
  for (const std::string& arg : pre_excite_args) {
    const auto [mode, beta] = parse_pre_excite(arg);
    if (mode < 1 || mode > params.num_modes())
      throw ValidationError("--pre-excite mode " + std::to_string(mode) + " out of range [1," +
                            std::to_string(params.num_modes()) + "]");
    state = pre_excite(state, mode - 1, std::complex<double>(beta, 0));
    echo.push_back(json{{"mode", mode}, {"beta", beta}});
  }
  if (!echo.empty()) config_echo["pre_excite"] = echo;
  return apply_doktorov(state, params);
}

std::vector<Index> to_zero_based(const std::vector<Index>& modes_1based, Index num_modes,
                                 const char* flag) {
  std::vector<Index> out;
  for (Index m : modes_1based) {
    if (m < 1 || m > num_modes)
      throw ValidationError(std::string(flag) + " index " + std::to_string(m) +
                            " out of range [1," + std::to_string(num_modes) + "]");
    out.push_back(m - 1);
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

int run(int argc, char** argv) {
  CLI::App app{"Vibronic excitation simulator: Doktorov parameters, exact photon-pattern "
               "probabilities, seeded sampling, marginals, and localized-mode dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // doktorov
  auto* cmd_dok = app.add_subcommand("doktorov", "Map a molecule file to Doktorov parameters");
  std::string dok_input, dok_output;
  cmd_dok->add_option("molecule-file", dok_input, "molecule or reduced-transition JSON")->required();
  cmd_dok->add_option("-o,--output", dok_output, "parameters file to write")->required();

  // shared pipeline flags
  std::string params_path;
  std::vector<std::string> pre_excite_args;
  int cutoff = 10;
  auto add_pipeline = [&](CLI::App* cmd) {
    cmd->add_option("params-file", params_path, "Doktorov parameters JSON")->required();
    cmd->add_option("--pre-excite", pre_excite_args,
                    "mode=beta coherent displacement before the transition (1-based, repeatable)");
    cmd->add_option("--cutoff", cutoff, "per-mode photon cutoff");
  };

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "Draw photon patterns by exact chain-rule sampling");
  int num_samples = 10000;
  std::uint64_t seed = 0;
  int max_total = kMaxTotalPhotons;
  int threads = 1;
  std::vector<Index> coex_modes_1based;
  std::string samples_output, summary_output;
  add_pipeline(cmd_sample);
  cmd_sample->add_option("--samples", num_samples, "number of samples");
  cmd_sample->add_option("--seed", seed, "RNG seed");
  cmd_sample->add_option("--max-total", max_total, "total-photon cap per sample");
  cmd_sample->add_option("--threads", threads, "worker threads (output is thread-count invariant)");
  cmd_sample->add_option("--modes", coex_modes_1based, "modes for the co-excitation table (1-based)")
      ->delimiter(',');
  cmd_sample->add_option("-o,--output", samples_output, "samples CSV to write")->required();
  cmd_sample->add_option("--summary", summary_output,
                         "summary JSON to write (default: <output>.summary.json)");

  // marginals
  auto* cmd_marg = app.add_subcommand("marginals", "Exact single-mode photon distributions");
  std::string marg_output;
  add_pipeline(cmd_marg);
  cmd_marg->add_option("-o,--output", marg_output, "marginals JSON to write")->required();

  // dynamics
  auto* cmd_dyn = app.add_subcommand("dynamics", "Localized-mode marginal versus time");
  std::string loc_path, dyn_output;
  std::vector<double> times_fs;
  Index dyn_mode_1based = 1;
  add_pipeline(cmd_dyn);
  cmd_dyn->add_option("localization-file", loc_path, "localized-mode basis JSON")->required();
  cmd_dyn->add_option("--times", times_fs, "times in femtoseconds")->delimiter(',')->required();
  cmd_dyn->add_option("--mode", dyn_mode_1based, "localized mode to track (1-based)")->required();
  cmd_dyn->add_option("-o,--output", dyn_output, "time-series JSON to write")->required();

  // prob
  auto* cmd_prob = app.add_subcommand("prob", "Exact probability of one photon pattern");
  std::vector<int> pattern;
  std::string prob_output;
  add_pipeline(cmd_prob);
  cmd_prob->add_option("--pattern", pattern, "comma-separated photon counts, one per mode")
      ->delimiter(',')
      ->required();
  cmd_prob->add_option("-o,--output", prob_output, "optional JSON output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();

  if (cmd_dok->parsed()) {
    const io::MoleculeInput input = io::read_molecule_file(dok_input);
    const DoktorovParamsd params = io::params_from_input(input);
    io::RunManifest manifest{"doktorov", {dok_input}, json::object(), kVersion, std::nullopt};
    io::write_params_file(dok_output, params, manifest);
    io::write_manifest_audit(manifest);
    std::cout << "wrote " << dok_output << " (" << params.num_modes() << " modes)\n";
    return 0;
  }

  const DoktorovParamsd params = io::read_params_file(params_path);

  if (cmd_sample->parsed()) {
    json config{{"samples", num_samples}, {"seed", seed},       {"cutoff", cutoff},
                {"max_total", max_total}, {"threads", threads}};
    const GaussianState<double> state = build_state(params, pre_excite_args, config);
    SamplerConfig cfg;
    cfg.num_samples = num_samples;
    cfg.seed = seed;
    cfg.cutoff = cutoff;
    cfg.max_total_photons = max_total;
    cfg.num_threads = threads;
    const SampleResult<double> result = draw_samples(state, cfg);
    io::write_samples_csv(samples_output, result.samples, state.num_modes());

    io::SampleSummary summary;
    summary.num_samples = num_samples;
    summary.seed = seed;
    summary.cutoff = cutoff;
    summary.max_total_photons = max_total;
    summary.samples_file = samples_output;
    summary.min_conditional_mass = result.min_conditional_mass;
    summary.worst_prefix = result.worst_prefix;
    RealVector<double> empirical = RealVector<double>::Zero(state.num_modes());
    for (const PhotonPattern& s : result.samples)
      for (Index j = 0; j < state.num_modes(); ++j) empirical[j] += s[static_cast<size_t>(j)];
    summary.mean_photons_sampled = empirical / double(num_samples);
    summary.mean_photons_exact = mean_photons(state);
    if (!coex_modes_1based.empty()) {
      summary.coexcitation_modes = to_zero_based(coex_modes_1based, state.num_modes(), "--modes");
      std::map<PhotonPattern, int> counts;
      for (const PhotonPattern& s : result.samples) {
        PhotonPattern sub;
        for (Index m : summary.coexcitation_modes) sub.push_back(s[static_cast<size_t>(m)]);
        ++counts[sub];
      }
      for (const auto& [sub, count] : counts)
        summary.coexcitation.emplace_back(sub, double(count) / double(num_samples));
      json modes_echo = json::array();
      for (Index m : coex_modes_1based) modes_echo.push_back(m);
      config["modes"] = modes_echo;
    }
    if (summary_output.empty()) summary_output = samples_output + ".summary.json";
    io::RunManifest manifest{"sample", {params_path}, config, kVersion, elapsed_ms(start)};
    io::write_summary_file(summary_output, summary, manifest);
    io::write_manifest_audit(manifest);
    std::cout << "wrote " << samples_output << " and " << summary_output << "\n";
    return 0;
  }

  if (cmd_marg->parsed()) {
    json config{{"cutoff", cutoff}};
    const GaussianState<double> state = build_state(params, pre_excite_args, config);
    const std::vector<Marginal<double>> marginals = single_mode_marginals(state, cutoff);
    io::RunManifest manifest{"marginals", {params_path}, config, kVersion, elapsed_ms(start)};
    io::write_marginals_file(marg_output, marginals, cutoff, manifest);
    io::write_manifest_audit(manifest);
    std::cout << "wrote " << marg_output << "\n";
    return 0;
  }

  if (cmd_dyn->parsed()) {
    json config{{"cutoff", cutoff}, {"mode", dyn_mode_1based}, {"times_fs", times_fs}};
    const GaussianState<double> state = build_state(params, pre_excite_args, config);
    const LocalizationMap<double> loc = io::read_localization_file(loc_path);
    if (dyn_mode_1based < 1 || dyn_mode_1based > state.num_modes())
      throw ValidationError("--mode index " + std::to_string(dyn_mode_1based) +
                            " out of range [1," + std::to_string(state.num_modes()) + "]");
    const Index mode = dyn_mode_1based - 1;
    std::vector<io::DynamicsPoint> series;
    for (double t : times_fs) {
      const GaussianState<double> evolved = evolve(state, loc, t);
      const Marginal<double> marg = single_mode_marginal(evolved, mode, cutoff);
      io::DynamicsPoint point;
      point.t_fs = t;
      point.probs = marg.probs;
      point.coverage = marg.coverage;
      point.mean_photons = mean_photons(evolved)[mode];
      series.push_back(std::move(point));
    }
    io::RunManifest manifest{"dynamics", {params_path, loc_path}, config, kVersion,
                             elapsed_ms(start)};
    io::write_dynamics_file(dyn_output, mode, cutoff, series, manifest);
    io::write_manifest_audit(manifest);
    std::cout << "wrote " << dyn_output << "\n";
    return 0;
  }

  if (cmd_prob->parsed()) {
    json config{{"pattern", pattern}};
    const GaussianState<double> state = build_state(params, pre_excite_args, config);
    const double p = pattern_probability(state, pattern);
    io::RunManifest manifest{"prob", {params_path}, config, kVersion, elapsed_ms(start)};
    const json doc = io::probability_json(pattern, p, manifest);
    std::cout << doc.dump(2) << "\n";
    if (!prob_output.empty()) io::atomic_write_text(prob_output, doc.dump(2) + "\n");
    io::write_manifest_audit(manifest);
    return 0;
  }

  return 2; // unreachable: require_subcommand(1)
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
