#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pimpcs/dataset.hpp"
#include "pimpcs/lyapunov.hpp"
#include "pimpcs/dynamics.hpp"
#include "pimpcs/numerics.hpp"

namespace pimpcs {

// 6 -> 10 -> 10 -> 10 -> 2, sigmoid after each hidden layer.
inline constexpr std::array<std::size_t, 5> kLayerDims{6, 10, 10, 10, 2};
inline constexpr std::size_t kLayerCount = kLayerDims.size() - 1;

constexpr std::size_t layer_param_count(std::size_t layer) {
  return kLayerDims[layer + 1] * (kLayerDims[layer] + 1);
}
constexpr std::size_t layer_offset(std::size_t layer) {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += layer_param_count(l);
  return off;
}
inline constexpr std::size_t kParamCount = layer_offset(kLayerCount);
static_assert(kParamCount == 312);

struct LossSet {
  bool l1 = true;
  bool l2 = false;
  bool l3 = false;
  bool l4 = false;

  // "l1,l2,l3" style; throws std::invalid_argument on unknown names.
  static LossSet parse(std::string_view spec);
  std::string str() const;
  bool needs_profile() const { return l3; }
  friend bool operator==(const LossSet&, const LossSet&) = default;
};

struct LossWeights {
  double w1 = 1.0;
  double w2 = 1000.0;
  double w3 = 1.0;
  double w4 = 100.0;

  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  LossSet losses;
  bool aux = false;
  LossWeights weights;
  int epochs = 0;
  double learning_rate = 0.0;
  std::size_t batch_size = 0;
  std::string dataset_digest;
  std::string profile_digest;
  std::string auxset_digest;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Flat parameter vector. Layer l stores W_l (out x in, row-major) then b_l.
struct SurrogateParams {
  std::vector<double> values = std::vector<double>(kParamCount, 0.0);
  Provenance provenance;

  std::span<double> weights(std::size_t layer) {
    return {values.data() + layer_offset(layer), kLayerDims[layer + 1] * kLayerDims[layer]};
  }
  std::span<const double> weights(std::size_t layer) const {
    return {values.data() + layer_offset(layer), kLayerDims[layer + 1] * kLayerDims[layer]};
  }
  std::span<double> biases(std::size_t layer) {
    return {values.data() + layer_offset(layer) + kLayerDims[layer + 1] * kLayerDims[layer],
            kLayerDims[layer + 1]};
  }
  std::span<const double> biases(std::size_t layer) const {
    return {values.data() + layer_offset(layer) + kLayerDims[layer + 1] * kLayerDims[layer],
            kLayerDims[layer + 1]};
  }

  friend bool operator==(const SurrogateParams&, const SurrogateParams&) = default;
};

// Kaiming uniform: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
SurrogateParams init_params(std::uint64_t seed);

double sigmoid(double z);

// u_c estimate h(s; mu).
Control forward(const SurrogateParams& mu, const State& s);

// Euler prediction of the next state under u_e + u_s(s) + h(s).
State predicted_next_state(const SurrogateParams& mu, const State& s, const PlantParams& p,
                           double dt);

// Individual losses: squared errors summed over components, averaged over samples.
double loss_control(const SurrogateParams& mu, std::span<const TransitionSample> batch);
double loss_dynamics(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                     const PlantParams& p, double dt);
double loss_lyapunov(const SurrogateParams& mu, std::span<const State> states, const SymMat6& P,
                     const PlantParams& p, double dt);
double loss_feasibility(const SurrogateParams& mu, std::span<const State> states,
                        const PlantParams& p, double dt);

struct LossEval {
  double total = 0.0;
  std::array<double, 4> terms{};  // unweighted L1..L4, zero when inactive
  std::vector<double> grad = std::vector<double>(kParamCount, 0.0);
};

struct LossContext {
  LossSet losses;
  LossWeights weights;
  const SymMat6* profile = nullptr;  // required iff losses.l3
  PlantParams plant;
  double dt = 0.05;
};

// Weighted objective and its exact gradient. L3 and L4 average over the batch
// states together with `aux` (pass an empty span for the plain variants).
LossEval total_loss_and_grad(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                             std::span<const State> aux, const LossContext& ctx);
// Value only.
double total_loss(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                  std::span<const State> aux, const LossContext& ctx);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m = std::vector<double>(kParamCount, 0.0);
  std::vector<double> v = std::vector<double>(kParamCount, 0.0);
  long long t = 0;
};

// Bias-corrected Adam; increments state.t.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg);

struct TrainConfig {
  int epochs = 200;
  AdamConfig adam;
  std::size_t batch_size = 256;  // 0 = full batch
  LossSet losses;
  bool aux = false;
  LossWeights weights;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  SurrogateParams params;
  // Mean minibatch objective per epoch.
  std::vector<double> epoch_loss;
  // Full-data objective before and after training.
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch, std::size_t batch, SurrogateParams last)
      : std::runtime_error(what), epoch_(epoch), batch_(batch), last_(std::move(last)) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  const SurrogateParams& last_finite() const { return last_; }

 private:
  int epoch_;
  std::size_t batch_;
  SurrogateParams last_;
};

// Adam over shuffled minibatches. `aux` is required iff cfg.aux and `profile`
// iff cfg.losses.l3. Auxiliary states are spread over the batches in
// proportion to batch length.
TrainResult train(const Dataset& d, const AuxSet* aux, const StabilityProfile* profile,
                  const TrainConfig& cfg, const PlantParams& p);

Policy surrogate_policy(SurrogateParams mu);

std::string serialize_model(const SurrogateParams& mu);
SurrogateParams parse_model(std::string_view text);
// Digest of the serialized body; equals the file trailer digest.
std::string model_digest(const SurrogateParams& mu);
void save_model(const SurrogateParams& mu, const std::filesystem::path& path);
SurrogateParams load_model(const std::filesystem::path& path);

}  // namespace pimpcs
