#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pimpcs/dataset.hpp"
#include "pimpcs/dynamics.hpp"
#include "pimpcs/lyapunov.hpp"
#include "pimpcs/mpc.hpp"
#include "pimpcs/parallel.hpp"
#include "pimpcs/surrogate.hpp"

namespace pimpcs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  PlantParams plant;
  SimulationSettings sim;
  MpcConfig mpc;
  ReferenceGrid grid;
  FitOptions fit;
  TrainConfig train;
  std::size_t aux_count = 5000;

  std::size_t runs = 100;
  std::size_t bench_runs = 20;
  double ood_margin = 0.0;

  std::uint64_t seed = 0;
  unsigned jobs = default_jobs();

  // Artifact paths, so a pipeline can run from one file.
  std::string data = "dataset.csv";
  std::string profile = "profile.txt";
  std::string auxset = "auxset.csv";
  std::string model = "model.txt";
  std::string report = "report";

  // Applies one key=value pair. Throws ConfigError on unknown keys or
  // unparsable values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  // Checks every section; throws ConfigError naming the first bad field.
  void validate() const;

  // Every key in canonical order, one "key = value" line each.
  std::string dump() const;
};

// Known keys in dump order.
const std::vector<std::string>& config_keys();

// Parses "key = value" lines; '#' starts a comment. Throws ConfigError with
// the line number on malformed lines.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

// Defaults, then the file (if any), then overrides in order. Validates.
RunConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::pair<std::string, std::string>>& overrides);

// `<artifact>.config`: resolved config plus the digests of consumed inputs.
std::filesystem::path config_dump_path(const std::filesystem::path& artifact);
void write_config_dump(const RunConfig& cfg, const std::filesystem::path& artifact,
                       const std::map<std::string, std::string>& input_digests);

}  // namespace pimpcs
