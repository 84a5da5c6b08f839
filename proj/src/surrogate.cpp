#include "pimpcs/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pimpcs/io.hpp"

namespace pimpcs {

namespace {

constexpr std::size_t kHidden = 10;

// Activations kept for the backward pass.
struct ForwardCache {
  std::array<double, 6> input{};
  std::array<std::array<double, kHidden>, 3> hidden{};
  Control output{};
};

template <std::size_t In, std::size_t Out>
void affine(const double* w, const double* b, const double* x, double* y) {
  for (std::size_t o = 0; o < Out; ++o) {
    double acc = b[o];
    const double* row = w + o * In;
    for (std::size_t i = 0; i < In; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void forward_cached(const SurrogateParams& mu, const State& s, ForwardCache& c) {
  const double* p = mu.values.data();
  std::copy(s.data.begin(), s.data.end(), c.input.begin());
  std::array<double, kHidden> z;

  affine<6, kHidden>(p + layer_offset(0), p + layer_offset(0) + 60, c.input.data(), z.data());
  for (std::size_t i = 0; i < kHidden; ++i) c.hidden[0][i] = sigmoid(z[i]);
  affine<kHidden, kHidden>(p + layer_offset(1), p + layer_offset(1) + 100, c.hidden[0].data(),
                           z.data());
  for (std::size_t i = 0; i < kHidden; ++i) c.hidden[1][i] = sigmoid(z[i]);
  affine<kHidden, kHidden>(p + layer_offset(2), p + layer_offset(2) + 100, c.hidden[1].data(),
                           z.data());
  for (std::size_t i = 0; i < kHidden; ++i) c.hidden[2][i] = sigmoid(z[i]);
  affine<kHidden, 2>(p + layer_offset(3), p + layer_offset(3) + 20, c.hidden[2].data(),
                     c.output.data.data());
}

// Accumulates d(loss)/d(mu) into grad given d(loss)/d(output).
void backward(const SurrogateParams& mu, const ForwardCache& c, const Vec2& g_out,
              double* grad) {
  const double* p = mu.values.data();

  // Output layer.
  {
    double* gw = grad + layer_offset(3);
    double* gb = gw + 20;
    for (std::size_t o = 0; o < 2; ++o) {
      gb[o] += g_out[o];
      for (std::size_t i = 0; i < kHidden; ++i) gw[o * kHidden + i] += g_out[o] * c.hidden[2][i];
    }
  }
  std::array<double, kHidden> g_a{};
  {
    const double* w = p + layer_offset(3);
    for (std::size_t i = 0; i < kHidden; ++i) g_a[i] = w[i] * g_out[0] + w[kHidden + i] * g_out[1];
  }

  for (std::size_t layer = 3; layer-- > 0;) {
    const auto& a = c.hidden[layer];
    std::array<double, kHidden> g_z;
    for (std::size_t i = 0; i < kHidden; ++i) g_z[i] = g_a[i] * a[i] * (1.0 - a[i]);
    const std::size_t in = kLayerDims[layer];
    const double* x = layer == 0 ? c.input.data() : c.hidden[layer - 1].data();
    double* gw = grad + layer_offset(layer);
    double* gb = gw + kHidden * in;
    for (std::size_t o = 0; o < kHidden; ++o) {
      gb[o] += g_z[o];
      double* row = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += g_z[o] * x[i];
    }
    if (layer == 0) break;
    const double* w = p + layer_offset(layer);
    g_a.fill(0.0);
    for (std::size_t o = 0; o < kHidden; ++o) {
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) g_a[i] += row[i] * g_z[o];
    }
  }
}

// Euler prediction and d(s_next)/d(h) for the net control u_e + u_s + h.
struct EulerPrediction {
  State next;
  Mat<6, 2> d_next_d_h;
};

EulerPrediction euler_prediction(const State& s, const Control& h, const PlantParams& p,
                                 double dt) {
  EulerPrediction e;
  const Control u = net_control(s, h, p);
  e.next = euler_step(s, u, dt, p);
  const double st = std::sin(s[kTheta]);
  const double ct = std::cos(s[kTheta]);
  const double arm = p.half_length / p.inertia;
  e.d_next_d_h(kXDot, 0) = e.d_next_d_h(kXDot, 1) = -dt * st / p.mass;
  e.d_next_d_h(kYDot, 0) = e.d_next_d_h(kYDot, 1) = dt * ct / p.mass;
  e.d_next_d_h(kThetaDot, 0) = dt * arm;
  e.d_next_d_h(kThetaDot, 1) = -dt * arm;
  return e;
}

struct StateTerms {
  double lyapunov = 0.0;     // squared hinge
  double feasibility = 0.0;  // max(-y_next, 0)^2
};

// State-only terms for one state; adds their weighted output gradient to g_out.
StateTerms state_terms(const State& s, const Control& h, const LossContext& ctx, double w3_scale,
                       double w4_scale, Vec2& g_out) {
  StateTerms t;
  const EulerPrediction e = euler_prediction(s, h, ctx.plant, ctx.dt);
  if (ctx.losses.l3) {
    const SymMat6& P = *ctx.profile;
    const Vec6 p_next = P.mat() * e.next;
    const double diff = dot(e.next, p_next) - P.quad(s);
    if (diff > 0.0) {
      t.lyapunov = diff * diff;
      // d(diff^2)/d(next) = 2 diff * 2 P next
      const Vec6 g_next = (4.0 * diff * w3_scale) * p_next;
      g_out += transpose_times(e.d_next_d_h, g_next);
    }
  }
  if (ctx.losses.l4) {
    const double y = e.next[kY];
    if (y < 0.0) {
      t.feasibility = y * y;
      const double g_y = 2.0 * y * w4_scale;
      g_out[0] += g_y * e.d_next_d_h(kY, 0);
      g_out[1] += g_y * e.d_next_d_h(kY, 1);
    }
  }
  return t;
}

LossEval evaluate_losses(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                         std::span<const State> aux, const LossContext& ctx, bool with_grad) {
  if (ctx.losses.l3 && ctx.profile == nullptr)
    throw std::invalid_argument("Lyapunov loss requires a stability profile");
  LossEval out;
  if (!with_grad) out.grad.clear();
  const bool state_losses = ctx.losses.l3 || ctx.losses.l4;
  const std::size_t n_data = batch.size();
  const std::size_t n_union = n_data + (state_losses ? aux.size() : 0);
  if (n_union == 0) return out;

  const double inv_data = n_data ? 1.0 / static_cast<double>(n_data) : 0.0;
  const double inv_union = 1.0 / static_cast<double>(n_union);
  const double w1 = ctx.losses.l1 ? ctx.weights.w1 : 0.0;
  const double w2 = ctx.losses.l2 ? ctx.weights.w2 : 0.0;
  const double w3 = ctx.losses.l3 ? ctx.weights.w3 : 0.0;
  const double w4 = ctx.losses.l4 ? ctx.weights.w4 : 0.0;

  double sum1 = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
  ForwardCache c;
  double* grad = with_grad ? out.grad.data() : nullptr;

  for (const TransitionSample& t : batch) {
    forward_cached(mu, t.s, c);
    Vec2 g_out{};
    if (ctx.losses.l1) {
      const Vec2 r = c.output - t.u_c;
      sum1 += dot(r, r);
      g_out += (2.0 * w1 * inv_data) * r;
    }
    if (ctx.losses.l2) {
      const EulerPrediction e = euler_prediction(t.s, c.output, ctx.plant, ctx.dt);
      const Vec6 r = t.s_plus - e.next;
      sum2 += dot(r, r);
      g_out += transpose_times(e.d_next_d_h, (-2.0 * w2 * inv_data) * r);
    }
    if (state_losses) {
      const StateTerms st =
          state_terms(t.s, c.output, ctx, w3 * inv_union, w4 * inv_union, g_out);
      sum3 += st.lyapunov;
      sum4 += st.feasibility;
    }
    if (grad) backward(mu, c, g_out, grad);
  }
  if (state_losses) {
    for (const State& s : aux) {
      forward_cached(mu, s, c);
      Vec2 g_out{};
      const StateTerms st = state_terms(s, c.output, ctx, w3 * inv_union, w4 * inv_union, g_out);
      sum3 += st.lyapunov;
      sum4 += st.feasibility;
      if (grad) backward(mu, c, g_out, grad);
    }
  }

  if (ctx.losses.l1) out.terms[0] = sum1 * inv_data;
  if (ctx.losses.l2) out.terms[1] = sum2 * inv_data;
  if (ctx.losses.l3) out.terms[2] = sum3 * inv_union;
  if (ctx.losses.l4) out.terms[3] = sum4 * inv_union;
  out.total = w1 * out.terms[0] + w2 * out.terms[1] + w3 * out.terms[2] + w4 * out.terms[3];
  return out;
}

}  // namespace

LossSet LossSet::parse(std::string_view spec) {
  LossSet s{false, false, false, false};
  for (std::string_view tok : split(spec, ',')) {
    tok = trim(tok);
    if (tok == "l1" || tok == "L1") s.l1 = true;
    else if (tok == "l2" || tok == "L2") s.l2 = true;
    else if (tok == "l3" || tok == "L3") s.l3 = true;
    else if (tok == "l4" || tok == "L4") s.l4 = true;
    else throw std::invalid_argument("unknown loss '" + std::string(tok) + "' (expected l1..l4)");
  }
  if (!s.l1) throw std::invalid_argument("loss set must include l1");
  return s;
}

std::string LossSet::str() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(l1, "l1");
  add(l2, "l2");
  add(l3, "l3");
  add(l4, "l4");
  return out;
}

void LossWeights::validate() const {
  if (!(w1 > 0.0)) throw std::invalid_argument("loss weight w1 must be positive");
  if (!(w2 >= 0.0) || !(w3 >= 0.0) || !(w4 >= 0.0))
    throw std::invalid_argument("loss weights must be non-negative");
}

SurrogateParams init_params(std::uint64_t seed) {
  SurrogateParams mu;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(kLayerDims[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : mu.weights(l)) w = dist(rng);
    for (double& b : mu.biases(l)) b = 0.0;
  }
  mu.provenance.seed = seed;
  return mu;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Control forward(const SurrogateParams& mu, const State& s) {
  ForwardCache c;
  forward_cached(mu, s, c);
  return c.output;
}

State predicted_next_state(const SurrogateParams& mu, const State& s, const PlantParams& p,
                           double dt) {
  return euler_step(s, net_control(s, forward(mu, s), p), dt, p);
}

double loss_control(const SurrogateParams& mu, std::span<const TransitionSample> batch) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : batch) {
    const Control r = t.u_c - forward(mu, t.s);
    sum += r[0] * r[0] + r[1] * r[1];
  }
  return sum / static_cast<double>(batch.size());
}

double loss_dynamics(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                     const PlantParams& p, double dt) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : batch) {
    const State r = t.s_plus - predicted_next_state(mu, t.s, p, dt);
    sum += dot(r, r);
  }
  return sum / static_cast<double>(batch.size());
}

double loss_lyapunov(const SurrogateParams& mu, std::span<const State> states, const SymMat6& P,
                     const PlantParams& p, double dt) {
  if (states.empty()) return 0.0;
  double sum = 0.0;
  for (const State& s : states) {
    const double diff = lyapunov_value(P, predicted_next_state(mu, s, p, dt)) - lyapunov_value(P, s);
    const double h = std::max(diff, 0.0);
    sum += h * h;
  }
  return sum / static_cast<double>(states.size());
}

double loss_feasibility(const SurrogateParams& mu, std::span<const State> states,
                        const PlantParams& p, double dt) {
  if (states.empty()) return 0.0;
  double sum = 0.0;
  for (const State& s : states) {
    const double below = std::max(-predicted_next_state(mu, s, p, dt)[kY], 0.0);
    sum += below * below;
  }
  return sum / static_cast<double>(states.size());
}

LossEval total_loss_and_grad(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                             std::span<const State> aux, const LossContext& ctx) {
  return evaluate_losses(mu, batch, aux, ctx, true);
}

double total_loss(const SurrogateParams& mu, std::span<const TransitionSample> batch,
                  std::span<const State> aux, const LossContext& ctx) {
  return evaluate_losses(mu, batch, aux, ctx, false).total;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw std::invalid_argument("adam_step: size mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
  if (!losses.l1) throw std::invalid_argument("loss set must include l1");
  weights.validate();
}

TrainResult train(const Dataset& d, const AuxSet* aux, const StabilityProfile* profile,
                  const TrainConfig& cfg, const PlantParams& p) {
  cfg.validate();
  p.validate();
  if (d.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.losses.l3 && profile == nullptr)
    throw std::invalid_argument("train: Lyapunov loss requires a stability profile");
  if (cfg.aux && aux == nullptr) throw std::invalid_argument("train: --aux requires an auxiliary set");

  LossContext ctx;
  ctx.losses = cfg.losses;
  ctx.weights = cfg.weights;
  ctx.profile = profile ? &profile->p : nullptr;
  ctx.plant = p;
  ctx.dt = d.meta.control_dt;

  const bool use_aux = cfg.aux && (cfg.losses.l3 || cfg.losses.l4);
  const std::span<const State> aux_all =
      use_aux ? std::span<const State>(aux->states) : std::span<const State>();

  TrainResult result;
  result.params = init_params(cfg.seed);
  SurrogateParams& mu = result.params;
  mu.provenance.losses = cfg.losses;
  mu.provenance.aux = cfg.aux;
  mu.provenance.weights = cfg.weights;
  mu.provenance.epochs = cfg.epochs;
  mu.provenance.learning_rate = cfg.adam.learning_rate;
  mu.provenance.batch_size = cfg.batch_size;
  mu.provenance.dataset_digest = dataset_digest(d);
  if (profile) mu.provenance.profile_digest = profile_digest(*profile);
  if (cfg.aux && aux) mu.provenance.auxset_digest = sha256_hex(serialize_auxset(*aux));

  result.initial_loss = total_loss(mu, d.samples, aux_all, ctx);

  const std::size_t n = d.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  const std::size_t n_batches = (n + batch - 1) / batch;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> aux_order(aux_all.size());
  std::iota(aux_order.begin(), aux_order.end(), 0);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<TransitionSample> batch_samples;
  std::vector<State> batch_aux;
  batch_samples.reserve(batch);
  AdamState adam;
  SurrogateParams last_finite = mu;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::shuffle(aux_order.begin(), aux_order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t lo = b * batch;
      const std::size_t hi = std::min(n, lo + batch);
      batch_samples.clear();
      for (std::size_t i = lo; i < hi; ++i) batch_samples.push_back(d.samples[order[i]]);
      batch_aux.clear();
      if (!aux_all.empty()) {
        const std::size_t a_lo = lo * aux_all.size() / n;
        const std::size_t a_hi = hi * aux_all.size() / n;
        for (std::size_t i = a_lo; i < a_hi; ++i) batch_aux.push_back(aux_all[aux_order[i]]);
      }
      const LossEval eval = total_loss_and_grad(mu, batch_samples, batch_aux, ctx);
      bool finite = std::isfinite(eval.total);
      for (double g : eval.grad) finite = finite && std::isfinite(g);
      if (!finite)
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(b),
                            epoch, b, last_finite);
      last_finite.values = mu.values;
      adam_step(mu.values, eval.grad, adam, cfg.adam);
      epoch_sum += eval.total * static_cast<double>(hi - lo);
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
  }
  for (double v : mu.values)
    if (!std::isfinite(v))
      throw TrainingError("non-finite parameters after training", cfg.epochs, 0, last_finite);
  result.final_loss = total_loss(mu, d.samples, aux_all, ctx);
  return result;
}

Policy surrogate_policy(SurrogateParams mu) {
  return [mu = std::move(mu)](const State& s) { return forward(mu, s); };
}

namespace {
constexpr std::string_view kModelTag = "# pimpcs-model v";
constexpr std::string_view kArchLine = "dims=6,10,10,10,2; act=sigmoid";
constexpr std::string_view kProvTag = "# provenance: ";
}  // namespace

std::string serialize_model(const SurrogateParams& mu) {
  const Provenance& pr = mu.provenance;
  std::string out = "# pimpcs-model v1\n";
  out += kArchLine;
  out += '\n';
  out += kProvTag;
  out += "seed=" + std::to_string(pr.seed) + "; losses=" + pr.losses.str() +
         "; aux=" + (pr.aux ? "1" : "0") + "; weights=" + format_general(pr.weights.w1) + "," +
         format_general(pr.weights.w2) + "," + format_general(pr.weights.w3) + "," +
         format_general(pr.weights.w4) + "; epochs=" + std::to_string(pr.epochs) +
         "; lr=" + format_general(pr.learning_rate) +
         "; batch=" + std::to_string(pr.batch_size) + "; dataset=" + pr.dataset_digest +
         "; profile=" + pr.profile_digest + "; auxset=" + pr.auxset_digest + "\n";
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const std::size_t in = kLayerDims[l];
    const auto w = mu.weights(l);
    for (std::size_t o = 0; o < kLayerDims[l + 1]; ++o) {
      for (std::size_t i = 0; i < in; ++i) {
        if (i) out.push_back(',');
        out += format_double(w[o * in + i]);
      }
      out.push_back('\n');
    }
    const auto b = mu.biases(l);
    for (std::size_t o = 0; o < b.size(); ++o) {
      if (o) out.push_back(',');
      out += format_double(b[o]);
    }
    out.push_back('\n');
  }
  return out;
}

SurrogateParams parse_model(std::string_view text) {
  const std::string what = "model";
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || lines[0].substr(0, kModelTag.size()) != kModelTag)
    throw FormatError(FormatError::Kind::kVersion, what + ": missing '# pimpcs-model v1' header", 1);
  const std::string_view version = trim(lines[0].substr(kModelTag.size()));
  if (version != "1")
    throw FormatError(FormatError::Kind::kVersion,
                      what + ": unsupported version '" + std::string(version) + "' (expected 1)", 1);
  const std::string_view body = unseal(text, what);
  if (lines.size() < 3 || trim(lines[1]) != kArchLine)
    throw FormatError(FormatError::Kind::kContent,
                      what + ": architecture line must be '" + std::string(kArchLine) + "'", 2);
  if (lines[2].substr(0, kProvTag.size()) != kProvTag)
    throw FormatError(FormatError::Kind::kMalformedRow, what + ": missing provenance line", 3);

  SurrogateParams mu;
  Provenance& pr = mu.provenance;
  try {
    for (const auto& [k, v] : parse_header_fields(lines[2].substr(kProvTag.size()))) {
      if (k == "seed") pr.seed = static_cast<std::uint64_t>(parse_int(v));
      else if (k == "losses") pr.losses = LossSet::parse(v);
      else if (k == "aux") pr.aux = v == "1";
      else if (k == "weights") {
        const auto w = split(v, ',');
        if (w.size() != 4) throw std::invalid_argument("weights needs 4 entries");
        pr.weights = {parse_double(w[0]), parse_double(w[1]), parse_double(w[2]),
                      parse_double(w[3])};
      } else if (k == "epochs") pr.epochs = static_cast<int>(parse_int(v));
      else if (k == "lr") pr.learning_rate = parse_double(v);
      else if (k == "batch") pr.batch_size = static_cast<std::size_t>(parse_int(v));
      else if (k == "dataset") pr.dataset_digest = v;
      else if (k == "profile") pr.profile_digest = v;
      else if (k == "auxset") pr.auxset_digest = v;
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::kMalformedRow, what + ": line 3: " + e.what(), 3);
  }

  const std::vector<std::string_view> body_lines = [&] {
    auto all = split(body, '\n');
    while (!all.empty() && trim(all.back()).empty()) all.pop_back();
    return all;
  }();
  std::size_t line = 3;  // zero-based index of first parameter row
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const std::size_t in = kLayerDims[l];
    const std::size_t out_dim = kLayerDims[l + 1];
    auto read_row = [&](std::span<double> dst) {
      if (line >= body_lines.size())
        throw FormatError(FormatError::Kind::kMalformedRow,
                          what + ": line " + std::to_string(line + 1) + ": missing parameter row",
                          line + 1);
      const auto fields = split(body_lines[line], ',');
      if (fields.size() != dst.size())
        throw FormatError(FormatError::Kind::kMalformedRow,
                          what + ": line " + std::to_string(line + 1) + ": expected " +
                              std::to_string(dst.size()) + " values",
                          line + 1);
      for (std::size_t i = 0; i < dst.size(); ++i) {
        try {
          dst[i] = parse_double(fields[i]);
        } catch (const std::invalid_argument& e) {
          throw FormatError(FormatError::Kind::kMalformedRow,
                            what + ": line " + std::to_string(line + 1) + ": " + e.what(),
                            line + 1);
        }
      }
      ++line;
    };
    auto w = mu.weights(l);
    for (std::size_t o = 0; o < out_dim; ++o) read_row(w.subspan(o * in, in));
    read_row(mu.biases(l));
  }
  if (line != body_lines.size())
    throw FormatError(FormatError::Kind::kMalformedRow,
                      what + ": line " + std::to_string(line + 1) + ": unexpected extra rows",
                      line + 1);
  return mu;
}

std::string model_digest(const SurrogateParams& mu) { return sha256_hex(serialize_model(mu)); }

void save_model(const SurrogateParams& mu, const std::filesystem::path& path) {
  write_file(path, seal_with_digest(serialize_model(mu)));
}

SurrogateParams load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path));
}

}  // namespace pimpcs
