#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibexc/doktorov.hpp"
#include "vibexc/dynamics.hpp"
#include "vibexc/gaussian_state.hpp"
#include "vibexc/sampler.hpp"

// File formats and run provenance. All structured documents are JSON with an
// explicit "schema" version tag; samples travel as CSV with the fixed header
// mode_1,...,mode_M. Every writer goes through an atomic temp-file + rename.
namespace vibexc::io {

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  nlohmann::json config = nlohmann::json::object();
  std::string artifact_version;
  // Populated only for outputs that need not be byte-reproducible; the
  // doktorov params file omits it so identical inputs give identical bytes.
  std::optional<double> wall_ms;
};

nlohmann::json manifest_json(const RunManifest& manifest);

// Either a full normal-mode molecule description or the already-reduced
// {Duschinsky, displacement, frequencies} form; readers dispatch on "schema".
struct ReducedTransition {
  RealMatrix<double> duschinsky;
  RealVector<double> displacement; // sqrt(amu)*angstrom
  RealVector<double> freq_initial; // cm^-1
  RealVector<double> freq_final;   // cm^-1
};

struct MoleculeInput {
  std::optional<MoleculeData<double>> molecule;
  std::optional<ReducedTransition> reduced;
};

MoleculeInput read_molecule_file(const std::string& path);
DoktorovParamsd params_from_input(const MoleculeInput& input);

void write_params_file(const std::string& path, const DoktorovParamsd& params,
                       const RunManifest& manifest);
DoktorovParamsd read_params_file(const std::string& path);

LocalizationMap<double> read_localization_file(const std::string& path);

void write_samples_csv(const std::string& path, const std::vector<PhotonPattern>& samples,
                       Index num_modes);
std::vector<PhotonPattern> read_samples_csv(const std::string& path);

std::string samples_csv_text(const std::vector<PhotonPattern>& samples, Index num_modes);

void write_marginals_file(const std::string& path, const std::vector<Marginal<double>>& marginals,
                          int cutoff, const RunManifest& manifest);

struct SampleSummary {
  int num_samples = 0;
  std::uint64_t seed = 0;
  int cutoff = 0;
  int max_total_photons = 0;
  std::string samples_file;
  RealVector<double> mean_photons_sampled;
  RealVector<double> mean_photons_exact;
  double min_conditional_mass = 1;
  PhotonPattern worst_prefix;
  // Empirical joint excitation table over the selected modes (0-based here;
  // serialized 1-based).
  std::vector<Index> coexcitation_modes;
  std::vector<std::pair<PhotonPattern, double>> coexcitation;
};

void write_summary_file(const std::string& path, const SampleSummary& summary,
                        const RunManifest& manifest);

struct DynamicsPoint {
  double t_fs = 0;
  RealVector<double> probs;
  double coverage = 0;
  double mean_photons = 0; // exact, from the evolved covariance
};

void write_dynamics_file(const std::string& path, Index mode, int cutoff,
                         const std::vector<DynamicsPoint>& series, const RunManifest& manifest);

nlohmann::json probability_json(const PhotonPattern& pattern, double probability,
                                const RunManifest& manifest);

// Temp-file-plus-rename in the target directory.
void atomic_write_text(const std::string& path, const std::string& text);

// VIBEXC_CACHE_DIR, if set: directory receiving an audit copy of each run's
// manifest. Never influences command output.
std::optional<std::string> cache_directory();
void write_manifest_audit(const RunManifest& manifest);

} // namespace vibexc::io
