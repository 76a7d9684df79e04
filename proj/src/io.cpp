#include "vibexc/io.hpp"

#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vibexc/constants.hpp"
#include "vibexc/errors.hpp"

namespace vibexc::io {

namespace {

using nlohmann::json;

constexpr const char* kMoleculeSchema = "vibexc/molecule/1";
constexpr const char* kReducedSchema = "vibexc/molecule-reduced/1";
constexpr const char* kParamsSchema = "vibexc/doktorov-params/1";
constexpr const char* kLocalizationSchema = "vibexc/localization/1";
constexpr const char* kMarginalsSchema = "vibexc/marginals/1";
constexpr const char* kSummarySchema = "vibexc/sample-summary/1";
constexpr const char* kDynamicsSchema = "vibexc/dynamics/1";

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": malformed JSON (" + e.what() + ")");
  }
}

void require_schema(const json& doc, const std::string& path, const char* schema) {
  if (!doc.contains("schema") || !doc["schema"].is_string() || doc["schema"] != schema)
    throw ValidationError(path + ": expected schema \"" + schema + "\"");
}

RealVector<double> get_vector(const json& doc, const std::string& path, const char* key,
                              Index expected = -1) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw ValidationError(path + ": missing numeric array \"" + key + "\"");
  const auto& arr = doc[key];
  RealVector<double> v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) {
    const auto& cell = arr[static_cast<size_t>(i)];
    if (!cell.is_number()) throw ValidationError(path + ": \"" + std::string(key) + "\" must be numeric");
    v[i] = cell.get<double>();
  }
  if (expected >= 0 && v.size() != expected)
    throw ValidationError(path + ": \"" + std::string(key) + "\" has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(expected));
  return v;
}

// Matrices are serialized as flat column-major arrays next to explicit
// dimension fields.
RealMatrix<double> get_matrix(const json& doc, const std::string& path, const char* key, Index rows,
                              Index cols) {
  const RealVector<double> flat = get_vector(doc, path, key, rows * cols);
  RealMatrix<double> m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = flat[c * rows + r];
  return m;
}

json vector_json(const RealVector<double>& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json matrix_json(const RealMatrix<double>& m) {
  json arr = json::array();
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r) arr.push_back(m(r, c));
  return arr;
}

Index get_index(const json& doc, const std::string& path, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer())
    throw ValidationError(path + ": missing integer field \"" + key + "\"");
  return doc[key].get<Index>();
}

void dump_to(const std::string& path, const json& doc) {
  atomic_write_text(path, doc.dump(2) + "\n");
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace

json manifest_json(const RunManifest& manifest) {
  json j{{"command", manifest.command},
         {"inputs", manifest.inputs},
         {"config", manifest.config},
         {"artifact_version", manifest.artifact_version}};
  if (manifest.wall_ms) j["wall_ms"] = *manifest.wall_ms;
  return j;
}

MoleculeInput read_molecule_file(const std::string& path) {
  const json doc = load_json(path);
  if (!doc.contains("schema") || !doc["schema"].is_string())
    throw ValidationError(path + ": missing \"schema\" field");
  const std::string schema = doc["schema"].get<std::string>();
  MoleculeInput input;
  if (schema == kMoleculeSchema) {
    const Index atoms = get_index(doc, path, "num_atoms");
    const Index modes = get_index(doc, path, "num_modes");
    if (atoms < 1 || modes < 1) throw ValidationError(path + ": num_atoms and num_modes must be >= 1");
    MoleculeData<double> mol;
    mol.masses = get_vector(doc, path, "masses", atoms);
    mol.geometry_initial = get_vector(doc, path, "geom_initial", 3 * atoms);
    mol.geometry_final = get_vector(doc, path, "geom_final", 3 * atoms);
    mol.modes_initial = get_matrix(doc, path, "modes_initial", 3 * atoms, modes);
    mol.modes_final = get_matrix(doc, path, "modes_final", 3 * atoms, modes);
    mol.freq_initial = get_vector(doc, path, "freq_initial", modes);
    mol.freq_final = get_vector(doc, path, "freq_final", modes);
    validate_molecule(mol);
    input.molecule = std::move(mol);
  } else if (schema == kReducedSchema) {
    const Index modes = get_index(doc, path, "num_modes");
    if (modes < 1) throw ValidationError(path + ": num_modes must be >= 1");
    ReducedTransition red;
    red.duschinsky = get_matrix(doc, path, "duschinsky", modes, modes);
    red.displacement = get_vector(doc, path, "displacement", modes);
    red.freq_initial = get_vector(doc, path, "freq_initial", modes);
    red.freq_final = get_vector(doc, path, "freq_final", modes);
    input.reduced = std::move(red);
  } else {
    throw ValidationError(path + ": unknown schema \"" + schema + "\"");
  }
  return input;
}

DoktorovParamsd params_from_input(const MoleculeInput& input) {
  if (input.molecule) return doktorov_params(*input.molecule);
  if (input.reduced)
    return doktorov_params_from_duschinsky(input.reduced->duschinsky, input.reduced->displacement,
                                           input.reduced->freq_initial, input.reduced->freq_final);
  throw ValidationError("molecule input holds neither form");
}

void write_params_file(const std::string& path, const DoktorovParamsd& params,
                       const RunManifest& manifest) {
  json doc{{"schema", kParamsSchema},
           {"num_modes", params.num_modes()},
           {"u_left", matrix_json(params.u_left)},
           {"sigma", vector_json(params.sigma)},
           {"u_right", matrix_json(params.u_right)},
           {"beta", vector_json(params.beta)},
           {"freq_final", vector_json(params.freq_final)},
           {"manifest", manifest_json(manifest)}};
  dump_to(path, doc);
}

DoktorovParamsd read_params_file(const std::string& path) {
  const json doc = load_json(path);
  require_schema(doc, path, kParamsSchema);
  const Index modes = get_index(doc, path, "num_modes");
  if (modes < 1) throw ValidationError(path + ": num_modes must be >= 1");
  DoktorovParamsd params;
  params.u_left = get_matrix(doc, path, "u_left", modes, modes);
  params.sigma = get_vector(doc, path, "sigma", modes);
  params.u_right = get_matrix(doc, path, "u_right", modes, modes);
  params.beta = get_vector(doc, path, "beta", modes);
  params.freq_final = get_vector(doc, path, "freq_final", modes);
  if (!(params.sigma.minCoeff() > 0)) throw ValidationError(path + ": sigma must be positive");
  if (!(params.freq_final.minCoeff() > 0))
    throw ValidationError(path + ": freq_final must be positive");
  for (const RealMatrix<double>* u : {&params.u_left, &params.u_right}) {
    const double defect =
        ((*u).transpose() * (*u) - RealMatrix<double>::Identity(modes, modes)).cwiseAbs().maxCoeff();
    if (!(defect <= 1e-6))
      throw ValidationError(path + ": rotation blocks are not orthogonal (defect " +
                            std::to_string(defect) + ")");
  }
  return params;
}

LocalizationMap<double> read_localization_file(const std::string& path) {
  const json doc = load_json(path);
  require_schema(doc, path, kLocalizationSchema);
  const Index modes = get_index(doc, path, "num_modes");
  if (modes < 1) throw ValidationError(path + ": num_modes must be >= 1");
  const RealMatrix<double> re = get_matrix(doc, path, "u_local", modes, modes);
  RealMatrix<double> im = RealMatrix<double>::Zero(modes, modes);
  if (doc.contains("u_local_imag")) im = get_matrix(doc, path, "u_local_imag", modes, modes);
  ComplexMatrix<double> u(modes, modes);
  u.real() = re;
  u.imag() = im;
  const RealVector<double> freq = get_vector(doc, path, "freq", modes);
  try {
    return localization_map(std::move(u), RealVector<double>(freq));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string samples_csv_text(const std::vector<PhotonPattern>& samples, Index num_modes) {
  std::ostringstream os;
  for (Index j = 0; j < num_modes; ++j) os << (j ? "," : "") << "mode_" << (j + 1);
  os << "\n";
  for (const PhotonPattern& s : samples) {
    if (static_cast<Index>(s.size()) != num_modes)
      throw ValidationError("samples: pattern width differs from mode count");
    for (Index j = 0; j < num_modes; ++j) os << (j ? "," : "") << s[static_cast<size_t>(j)];
    os << "\n";
  }
  return os.str();
}

void write_samples_csv(const std::string& path, const std::vector<PhotonPattern>& samples,
                       Index num_modes) {
  atomic_write_text(path, samples_csv_text(samples, num_modes));
}

std::vector<PhotonPattern> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  if (line.rfind("mode_1", 0) != 0) throw ValidationError(path + ": missing mode_1,... header");
  std::vector<PhotonPattern> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    PhotonPattern pattern;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        size_t used = 0;
        const int value = std::stoi(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        pattern.push_back(value);
      } catch (const std::exception&) {
        throw ValidationError(path + ": non-integer cell \"" + cell + "\"");
      }
    }
    samples.push_back(std::move(pattern));
  }
  return samples;
}

void write_marginals_file(const std::string& path, const std::vector<Marginal<double>>& marginals,
                          int cutoff, const RunManifest& manifest) {
  json entries = json::array();
  for (const auto& m : marginals)
    entries.push_back(json{{"mode", m.mode + 1}, {"probs", vector_json(m.probs)}, {"coverage", m.coverage}});
  dump_to(path, json{{"schema", kMarginalsSchema},
                     {"cutoff", cutoff},
                     {"marginals", entries},
                     {"manifest", manifest_json(manifest)}});
}

void write_summary_file(const std::string& path, const SampleSummary& summary,
                        const RunManifest& manifest) {
  json coex = json::array();
  for (const auto& [pattern, fraction] : summary.coexcitation)
    coex.push_back(json{{"pattern", pattern}, {"fraction", fraction}});
  std::vector<Index> modes_1based;
  for (Index m : summary.coexcitation_modes) modes_1based.push_back(m + 1);
  json doc{{"schema", kSummarySchema},
           {"num_samples", summary.num_samples},
           {"seed", summary.seed},
           {"cutoff", summary.cutoff},
           {"max_total_photons", summary.max_total_photons},
           {"samples_file", summary.samples_file},
           {"mean_photons_sampled", vector_json(summary.mean_photons_sampled)},
           {"mean_photons_exact", vector_json(summary.mean_photons_exact)},
           {"truncation",
            json{{"min_conditional_mass", summary.min_conditional_mass},
                 {"worst_prefix", summary.worst_prefix}}},
           {"coexcitation", json{{"modes", modes_1based}, {"table", coex}}},
           {"manifest", manifest_json(manifest)}};
  dump_to(path, doc);
}

void write_dynamics_file(const std::string& path, Index mode, int cutoff,
                         const std::vector<DynamicsPoint>& series, const RunManifest& manifest) {
  json points = json::array();
  for (const auto& p : series)
    points.push_back(json{{"t_fs", p.t_fs},
                          {"probs", vector_json(p.probs)},
                          {"coverage", p.coverage},
                          {"mean_photons", p.mean_photons}});
  dump_to(path, json{{"schema", kDynamicsSchema},
                     {"mode", mode + 1},
                     {"cutoff", cutoff},
                     {"series", points},
                     {"manifest", manifest_json(manifest)}});
}

json probability_json(const PhotonPattern& pattern, double probability, const RunManifest& manifest) {
  return json{{"pattern", pattern}, {"probability", probability}, {"manifest", manifest_json(manifest)}};
}

void atomic_write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(static_cast<unsigned long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError(path + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw NumericalError(path + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ValidationError(path + ": rename failed (" + ec.message() + ")");
  }
}

std::optional<std::string> cache_directory() {
  const char* dir = std::getenv("VIBEXC_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::string(dir);
}

void write_manifest_audit(const RunManifest& manifest) {
  const auto dir = cache_directory();
  if (!dir) return;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(*dir, ec);
  const std::string body = manifest_json(manifest).dump(2) + "\n";
  std::ostringstream name;
  name << manifest.command << "-" << std::hex << fnv1a(body) << ".json";
  atomic_write_text((fs::path(*dir) / name.str()).string(), body);
}

} // namespace vibexc::io
