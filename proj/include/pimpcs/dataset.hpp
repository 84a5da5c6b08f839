#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pimpcs/dynamics.hpp"
#include "pimpcs/mpc.hpp"

namespace pimpcs {

struct TransitionSample {
  int traj_id = 0;
  int k = 0;
  State s{};
  Control u_c{};  // controller term only; u_e + u_s are rebuilt from the plant
  State s_plus{};

  friend bool operator==(const TransitionSample&, const TransitionSample&) = default;
};

struct DatasetMeta {
  double control_dt = 0.05;
  double duration = 15.0;
  int trajectories = 0;
  std::string plant_digest;
  std::string mpc_digest;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct Dataset {
  std::vector<TransitionSample> samples;
  DatasetMeta meta;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<State> states() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Rectangular grid of initial positions, remaining state components zero.
struct ReferenceGrid {
  double x_min = -2.5;
  double x_max = 2.5;
  int nx = 21;
  double y_min = 3.5;
  double y_max = 6.5;
  int ny = 13;

  void validate() const;
  std::vector<State> initial_states() const;
};

struct GenerationFailure {
  int traj_id = 0;
  State initial{};
  std::string reason;
};

struct GenerationResult {
  Dataset dataset;
  std::vector<GenerationFailure> failures;
};

// Short digests identifying the plant / MPC settings a dataset came from.
std::string plant_digest(const PlantParams& p);
std::string mpc_digest(const MpcConfig& cfg);

// One MPC-driven simulation per grid point, trajectory ids in grid order
// (x-major). Unsuccessful landings are kept and listed in `failures`;
// simulations that abort are listed and contribute no samples.
GenerationResult generate_reference(const ReferenceGrid& grid, const SimulationSettings& sim,
                                    const MpcConfig& mpc, const PlantParams& p,
                                    std::uint64_t seed = 0, unsigned jobs = 1);

// Appends one trajectory's transitions.
void append_trajectory(Dataset& d, int traj_id, const Trajectory& traj);

// Per-dimension closed bounding box.
struct StateBox {
  Vec6 lo{};
  Vec6 hi{};

  bool contains(const State& s) const;
};

StateBox bounding_box(const Dataset& d);
StateBox near_origin_box();

// Bounding-box approximation of convex-hull membership.
bool in_distribution(const State& s, const StateBox& box);
bool in_distribution(const State& s, const Dataset& d);

struct AuxSet {
  std::vector<State> states;
  std::size_t low_density_count = 0;
  std::size_t near_origin_count = 0;
  std::uint64_t seed = 0;
  std::string dataset_digest;

  std::size_t size() const { return states.size(); }
  friend bool operator==(const AuxSet&, const AuxSet&) = default;
};

// First ceil(n/2) states uniform over the data bounding box, the remaining
// floor(n/2) uniform over the near-origin box.
AuxSet sample_auxiliary(const Dataset& d, std::size_t n_total, std::uint64_t seed);

std::string serialize_dataset(const Dataset& d);
Dataset parse_dataset(std::string_view text);
// Digest of the serialized body; equals the file trailer digest.
std::string dataset_digest(const Dataset& d);
void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::string serialize_auxset(const AuxSet& a);
AuxSet parse_auxset(std::string_view text);
void save_auxset(const AuxSet& a, const std::filesystem::path& path);
AuxSet load_auxset(const std::filesystem::path& path);

}  // namespace pimpcs
