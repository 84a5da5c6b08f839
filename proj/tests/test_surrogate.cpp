#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "pimpcs/dataset.hpp"
#include "pimpcs/io.hpp"
#include "pimpcs/surrogate.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace pimpcs;

namespace {

using testing::aux_states;
using testing::fd_gradient_error;
using testing::micro_batch;
using testing::random_params;
using testing::test_profile;

const PlantParams kPlant{};
constexpr double kDt = 0.05;

// Straight-line evaluation with explicit layer loops.
Control chain_forward(const SurrogateParams& mu, const State& s) {
  std::vector<double> a(s.data.begin(), s.data.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t in = kLayerDims[l];
    const std::size_t out = kLayerDims[l + 1];
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = mu.values[off + out * in + o];
      for (std::size_t i = 0; i < in; ++i) acc += mu.values[off + o * in + i] * a[i];
      z[o] = l + 1 < 4 ? 1.0 / (1.0 + std::exp(-z[o] - acc)) : acc;
    }
    off += out * (in + 1);
    a = z;
  }
  return Control{{a[0], a[1]}};
}

std::vector<State> states_of(std::span<const TransitionSample> b) {
  std::vector<State> out;
  for (const auto& t : b) out.push_back(t.s);
  return out;
}

std::vector<State> joined(std::span<const TransitionSample> b, std::span<const State> aux) {
  auto out = states_of(b);
  out.insert(out.end(), aux.begin(), aux.end());
  return out;
}

LossContext context(const LossSet& set, const SymMat6* profile) {
  LossContext ctx;
  ctx.losses = set;
  ctx.profile = profile;
  ctx.plant = kPlant;
  ctx.dt = kDt;
  return ctx;
}

Dataset linear_policy_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    TransitionSample t;
    t.traj_id = static_cast<int>(i / 100);
    t.k = static_cast<int>(i % 100);
    for (double& x : t.s.data) x = u(rng);
    t.u_c = {{0.1 * (t.s[0] - 0.5 * t.s[2] + t.s[4]), 0.1 * (0.5 * t.s[1] + t.s[3] - t.s[5])}};
    t.s_plus = euler_step(t.s, net_control(t.s, t.u_c, kPlant), kDt, kPlant);
    d.samples.push_back(t);
  }
  d.meta.trajectories = static_cast<int>((n + 99) / 100);
  return d;
}

}  // namespace

TEST_CASE("parameter census and layout") {
  CHECK(kParamCount == 312);
  CHECK(layer_offset(0) == 0);
  CHECK(layer_offset(1) == 70);
  CHECK(layer_offset(2) == 180);
  CHECK(layer_offset(3) == 290);
  CHECK(7 * 10 + 11 * 10 + 11 * 10 + 11 * 2 == 312);
  const SurrogateParams mu = init_params(1);
  CHECK(mu.values.size() == 312);
  CHECK(mu.weights(3).size() == 20);
  CHECK(mu.biases(3).size() == 2);
}

TEST_CASE("Kaiming uniform initialization") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const SurrogateParams mu = init_params(seed);
    for (std::size_t l = 0; l < kLayerCount; ++l) {
      const double bound = std::sqrt(6.0 / static_cast<double>(kLayerDims[l]));
      for (double w : mu.weights(l)) CHECK(std::fabs(w) <= bound);
      for (double b : mu.biases(l)) CHECK(b == 0.0);
    }
    CHECK(mu.provenance.seed == seed);
  }
  CHECK(init_params(5) == init_params(5));
  CHECK_FALSE(init_params(5).values == init_params(6).values);
}

TEST_CASE("layer one draws fill the unit interval") {
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; count < 10000; ++seed) {
    for (double w : init_params(seed).weights(0)) {
      CHECK(std::fabs(w) <= 1.0);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
      ++count;
    }
  }
  CHECK(lo < -0.99);
  CHECK(hi > 0.99);
}

TEST_CASE("forward fixtures and chain oracle") {
  SurrogateParams zero;
  CHECK(forward(zero, State{{1, 2, 3, 4, 5, 6}}) == Control{});
  zero.biases(3)[0] = 1.5;
  zero.biases(3)[1] = -2.5;
  CHECK(forward(zero, State{{-7, 0, 1, 0, 3, 0}}) == Control{{1.5, -2.5}});
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(40.0) == doctest::Approx(1.0));
  CHECK(sigmoid(-800.0) >= 0.0);

  std::mt19937_64 rng(2);
  for (int n = 0; n < 200; ++n) {
    const SurrogateParams mu = random_params(rng);
    const State s = testing::random_vec6(rng, 3.0);
    const Control a = forward(mu, s);
    const Control b = chain_forward(mu, s);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
  }
  const SurrogateParams mu = random_params(rng);
  const Policy pol = surrogate_policy(mu);
  CHECK(pol(State{{0.1, 2, 0, 0, 0, 0}}) == forward(mu, State{{0.1, 2, 0, 0, 0, 0}}));
}

TEST_CASE("control loss") {
  SurrogateParams zero;
  TransitionSample t;
  t.u_c = {{3.0, 4.0}};
  const std::vector<TransitionSample> one{t};
  CHECK(loss_control(zero, one) == 25.0);

  zero.biases(3)[0] = 3.0;
  zero.biases(3)[1] = 4.0;
  CHECK(loss_control(zero, one) == 0.0);

  std::mt19937_64 rng(3);
  const SurrogateParams mu = random_params(rng);
  const auto batch = micro_batch(rng, 37);
  double sum = 0.0;
  for (const auto& s : batch) {
    const Control h = chain_forward(mu, s.s);
    sum += (s.u_c[0] - h[0]) * (s.u_c[0] - h[0]) + (s.u_c[1] - h[1]) * (s.u_c[1] - h[1]);
  }
  CHECK(loss_control(mu, batch) == doctest::Approx(sum / 37.0).epsilon(1e-12));
}

TEST_CASE("dynamics loss") {
  std::mt19937_64 rng(4);
  const SurrogateParams mu = random_params(rng);
  auto batch = micro_batch(rng, 25);
  // Self-consistent data: s+ is the Euler step under the network's own control.
  for (auto& t : batch)
    t.s_plus = euler_step(t.s, net_control(t.s, forward(mu, t.s), kPlant), kDt, kPlant);
  CHECK(loss_dynamics(mu, batch, kPlant, kDt) == 0.0);
  for (const auto& t : batch) CHECK(predicted_next_state(mu, t.s, kPlant, kDt) == t.s_plus);

  batch[0].s_plus[1] += 0.5;
  CHECK(loss_dynamics(mu, batch, kPlant, kDt) == doctest::Approx(0.25 / 25.0).epsilon(1e-12));
}

TEST_CASE("dynamics loss of a perfect mimic is the Euler gap") {
  ReferenceGrid g{0.0, 0.0, 1, 5.0, 5.0, 1};
  const Dataset d = generate_reference(g, SimulationSettings{}, MpcConfig{}, kPlant).dataset;
  // Evaluate the loss with the recorded controls in place of the network.
  double gap = 0.0;
  for (const auto& t : d.samples) {
    const State e = euler_step(t.s, net_control(t.s, t.u_c, kPlant), kDt, kPlant);
    for (std::size_t i = 0; i < 6; ++i) gap += (t.s_plus[i] - e[i]) * (t.s_plus[i] - e[i]);
  }
  gap /= static_cast<double>(d.size());
  CHECK(gap > 0.0);
  CHECK(gap < 1e-5);
  // A zero network sees a larger residual than the recorded controls.
  CHECK(loss_dynamics(SurrogateParams{}, d.samples, kPlant, kDt) > gap);
}

TEST_CASE("stability loss fixtures") {
  // Zero network at hover reference: the stabilizer contracts toward the origin.
  const std::vector<State> calm{State{{0.1, 0.2, 0.0, 0.0, 0.0, 0.0}}};
  SurrogateParams zero;
  const SymMat6 eye = SymMat6::identity();
  const double d = eye.quad(predicted_next_state(zero, calm[0], kPlant, kDt)) - eye.quad(calm[0]);
  CHECK(loss_lyapunov(zero, calm, eye, kPlant, kDt) == doctest::Approx(d > 0 ? d * d : 0.0));

  // Falling from y = 0: V = w y^2 rises from 0 to w (v dt)^2; pick w for a 0.3 rise.
  const State s{{0, 0, 0, 0, -1.0, 0}};
  const State next = predicted_next_state(zero, s, kPlant, kDt);
  CHECK(next[kY] == doctest::Approx(-kDt));
  Vec6 w{};
  w[kY] = 0.3 / (next[kY] * next[kY]);
  const std::vector<State> one{s};
  CHECK(loss_lyapunov(zero, one, SymMat6::diagonal(w), kPlant, kDt) ==
        doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("stability loss hand fixture with a synthetic profile") {
  // State at rest at x = 0, y = 0 with the zero network is an equilibrium:
  // V difference exactly 0 and the hinge is silent.
  SurrogateParams zero;
  const std::vector<State> origin{State{}};
  CHECK(loss_lyapunov(zero, origin, SymMat6::identity(), kPlant, kDt) == 0.0);
  const LossContext ctx = context(LossSet::parse("l1,l3"), nullptr);
  SymMat6 eye = SymMat6::identity();
  LossContext with = ctx;
  with.profile = &eye;
  TransitionSample t;
  t.s_plus = euler_step(State{}, net_control(State{}, Control{}, kPlant), kDt, kPlant);
  const std::vector<TransitionSample> b{t};
  const LossEval e = total_loss_and_grad(zero, b, {}, with);
  CHECK(e.terms[2] == 0.0);
  // Only the control loss contributes at the kink.
  for (std::size_t i = 0; i < layer_offset(3); ++i) CHECK(e.grad[i] == 0.0);
}

TEST_CASE("feasibility loss fixtures") {
  SurrogateParams zero;
  // Hover thrust at rest: predicted altitude stays put.
  const std::vector<State> up{State{{0, 1, 0, 0, 0, 0}}};
  CHECK(loss_feasibility(zero, up, kPlant, kDt) == 0.0);
  // ydot chosen so the Euler step lands at y+ = -0.2.
  const State s{{0, 0, 0, 0, -0.2 / kDt, 0}};
  const State next = predicted_next_state(zero, s, kPlant, kDt);
  CHECK(next[1] == doctest::Approx(-0.2));
  const std::vector<State> one{s};
  CHECK(loss_feasibility(zero, one, kPlant, kDt) == doctest::Approx(0.04).epsilon(1e-12));
  const std::vector<State> two{s, up[0]};
  CHECK(loss_feasibility(zero, two, kPlant, kDt) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("losses are non-negative") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 50; ++n) {
    const SurrogateParams mu = random_params(rng);
    const auto b = micro_batch(rng, 10);
    const auto st = states_of(b);
    const SymMat6 p = test_profile(rng);
    CHECK(loss_control(mu, b) >= 0.0);
    CHECK(loss_dynamics(mu, b, kPlant, kDt) >= 0.0);
    CHECK(loss_lyapunov(mu, st, p, kPlant, kDt) >= 0.0);
    CHECK(loss_feasibility(mu, st, kPlant, kDt) >= 0.0);
  }
}

TEST_CASE("weighted total equals the hand-summed terms") {
  std::mt19937_64 rng(6);
  const SurrogateParams mu = random_params(rng);
  const auto b = micro_batch(rng, 16);
  const auto aux = aux_states(rng, 8);
  const SymMat6 p = test_profile(rng);
  const LossContext ctx = context(LossSet::parse("l1,l2,l3,l4"), &p);
  const LossEval e = total_loss_and_grad(mu, b, aux, ctx);
  const auto all = joined(b, aux);
  const double l1 = loss_control(mu, b);
  const double l2 = loss_dynamics(mu, b, kPlant, kDt);
  const double l3 = loss_lyapunov(mu, all, p, kPlant, kDt);
  const double l4 = loss_feasibility(mu, all, kPlant, kDt);
  CHECK(l3 > 0.0);
  CHECK(l4 > 0.0);
  CHECK(e.terms[0] == doctest::Approx(l1).epsilon(1e-12));
  CHECK(e.terms[1] == doctest::Approx(l2).epsilon(1e-12));
  CHECK(e.terms[2] == doctest::Approx(l3).epsilon(1e-12));
  CHECK(e.terms[3] == doctest::Approx(l4).epsilon(1e-12));
  CHECK(e.total == doctest::Approx(l1 + 1000.0 * l2 + l3 + 100.0 * l4).epsilon(1e-12));
  CHECK(total_loss(mu, b, aux, ctx) == doctest::Approx(e.total).epsilon(1e-12));
}

TEST_CASE("singleton weights isolate each term") {
  std::mt19937_64 rng(7);
  const SurrogateParams mu = random_params(rng);
  const auto b = micro_batch(rng, 12);
  const SymMat6 p = test_profile(rng);
  LossContext ctx = context(LossSet::parse("l1,l2,l3,l4"), &p);
  ctx.weights = {2.5, 0.0, 0.0, 0.0};
  CHECK(total_loss(mu, b, {}, ctx) == doctest::Approx(2.5 * loss_control(mu, b)).epsilon(1e-14));
  const auto st = states_of(b);
  ctx.weights = {1e-300, 3.0, 0.0, 0.0};
  CHECK(total_loss(mu, b, {}, ctx) ==
        doctest::Approx(3.0 * loss_dynamics(mu, b, kPlant, kDt)).epsilon(1e-14));
  ctx.weights = {1e-300, 0.0, 3.0, 0.0};
  CHECK(total_loss(mu, b, {}, ctx) ==
        doctest::Approx(3.0 * loss_lyapunov(mu, st, p, kPlant, kDt)).epsilon(1e-14));
  ctx.weights = {1e-300, 0.0, 0.0, 3.0};
  CHECK(total_loss(mu, b, {}, ctx) ==
        doctest::Approx(3.0 * loss_feasibility(mu, st, kPlant, kDt)).epsilon(1e-14));
}

TEST_CASE("inactive losses contribute nothing") {
  std::mt19937_64 rng(8);
  const SurrogateParams mu = random_params(rng);
  const auto b = micro_batch(rng, 12);
  const SymMat6 p = test_profile(rng);
  const LossEval only = total_loss_and_grad(mu, b, aux_states(rng, 5), context(LossSet{}, &p));
  CHECK(only.total == doctest::Approx(loss_control(mu, b)).epsilon(1e-14));
  CHECK(only.terms[1] == 0.0);
  CHECK(only.terms[2] == 0.0);
  CHECK(only.terms[3] == 0.0);
  // The output layer gradient of L1 alone: -2/N sum (u_c - h) * a3.
  double bias_grad = 0.0;
  for (const auto& t : b) bias_grad += -2.0 * (t.u_c[0] - forward(mu, t.s)[0]);
  CHECK(only.grad[layer_offset(3) + 20] == doctest::Approx(bias_grad / 12.0).epsilon(1e-12));
}

TEST_CASE("gradients match central differences for every toggle combination") {
  std::mt19937_64 rng(9);
  const char* sets[] = {"l1", "l1,l2", "l1,l3", "l1,l4", "l1,l2,l3", "l1,l2,l4", "l1,l3,l4",
                        "l1,l2,l3,l4"};
  for (int n = 0; n < 20; ++n) {
    const SurrogateParams mu = random_params(rng);
    const auto b = micro_batch(rng, 6);
    const auto aux = n % 2 ? aux_states(rng, 4) : std::vector<State>{};
    const SymMat6 p = test_profile(rng);
    for (const char* s : sets) {
      CAPTURE(n);
      CAPTURE(s);
      const LossContext ctx = context(LossSet::parse(s), &p);
      CHECK(fd_gradient_error(mu, b, aux, ctx) < 1e-4);
    }
  }
}

TEST_CASE("Adam closed-form steps") {
  AdamConfig cfg;
  std::vector<double> params{1.0, -2.0, 3.0};
  const std::vector<double> g{0.5, -1e-3, 2.0};
  AdamState st;
  st.m.assign(3, 0.0);
  st.v.assign(3, 0.0);
  adam_step(params, g, st, cfg);
  CHECK(st.t == 1);
  // After bias correction m_hat = g and v_hat = g^2 on the first step.
  const double first[] = {1.0, -2.0, 3.0};
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(params[i] ==
          doctest::Approx(first[i] - cfg.learning_rate * g[i] / (std::fabs(g[i]) + cfg.epsilon))
              .epsilon(1e-14));

  // Zero gradient: parameters stay, moments decay.
  const std::vector<double> before = params;
  const std::vector<double> m = st.m;
  const std::vector<double> v = st.v;
  adam_step(params, std::vector<double>(3, 0.0), st, cfg);
  CHECK(params[0] != before[0]);  // momentum still moves parameters
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(st.m[i] == doctest::Approx(0.9 * m[i]));
    CHECK(st.v[i] == doctest::Approx(0.999 * v[i]));
  }

  AdamState fresh;
  fresh.m.assign(3, 0.0);
  fresh.v.assign(3, 0.0);
  std::vector<double> still{1.0, 2.0, 3.0};
  adam_step(still, std::vector<double>(3, 0.0), fresh, cfg);
  CHECK(still == std::vector<double>{1.0, 2.0, 3.0});

  // Constant gradient: the step tends to lr * sign(g).
  std::vector<double> x{0.0, 0.0};
  AdamState cs;
  cs.m.assign(2, 0.0);
  cs.v.assign(2, 0.0);
  const std::vector<double> cg{3.0, -0.01};
  for (int k = 0; k < 5000; ++k) adam_step(x, cg, cs, cfg);
  const std::vector<double> prev = x;
  adam_step(x, cg, cs, cfg);
  CHECK(prev[0] - x[0] == doctest::Approx(cfg.learning_rate).epsilon(1e-6));
  CHECK(x[1] - prev[1] == doctest::Approx(cfg.learning_rate).epsilon(1e-4));

  AdamState wrong;
  CHECK_THROWS_AS(adam_step(x, cg, wrong, cfg), std::invalid_argument);
}

TEST_CASE("loss set parsing") {
  CHECK(LossSet::parse("l1") == LossSet{});
  const LossSet all = LossSet::parse("l1, L2,l3,l4");
  CHECK(all == LossSet{true, true, true, true});
  CHECK(all.str() == "l1,l2,l3,l4");
  CHECK(all.needs_profile());
  CHECK(LossSet::parse("l1,l4").str() == "l1,l4");
  CHECK_THROWS_AS(LossSet::parse("l1,l5"), std::invalid_argument);
  CHECK_THROWS_AS(LossSet::parse("l2,l3"), std::invalid_argument);
  LossWeights w;
  CHECK(w == LossWeights{1.0, 1000.0, 1.0, 100.0});
  w.w1 = 0.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w = LossWeights{1.0, -1.0, 0.0, 0.0};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("training fits a linear policy") {
  const Dataset d = linear_policy_dataset(2000, 1);
  TrainConfig cfg;
  const TrainResult r = train(d, nullptr, nullptr, cfg, kPlant);
  REQUIRE(r.epoch_loss.size() == 200);
  for (double v : r.epoch_loss) CHECK(std::isfinite(v));
  CHECK(r.final_loss < r.initial_loss);
  CHECK(loss_control(r.params, d.samples) < 1e-3);
  CHECK(r.final_loss == doctest::Approx(loss_control(r.params, d.samples)).epsilon(1e-12));
}

TEST_CASE("training is deterministic and records provenance") {
  const Dataset d = linear_policy_dataset(300, 2);
  std::mt19937_64 rng(10);
  StabilityProfile prof;
  prof.p = test_profile(rng);
  AuxSet aux;
  aux.states = aux_states(rng, 40);
  aux.low_density_count = 20;
  aux.near_origin_count = 20;
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 64;
  cfg.losses = LossSet::parse("l1,l2,l3,l4");
  cfg.aux = true;
  cfg.seed = 17;
  const TrainResult a = train(d, &aux, &prof, cfg, kPlant);
  const TrainResult b = train(d, &aux, &prof, cfg, kPlant);
  CHECK(a.params == b.params);
  CHECK(a.epoch_loss == b.epoch_loss);
  const Provenance& pr = a.params.provenance;
  CHECK(pr.seed == 17);
  CHECK(pr.losses == cfg.losses);
  CHECK(pr.aux);
  CHECK(pr.epochs == 5);
  CHECK(pr.batch_size == 64);
  CHECK(pr.dataset_digest == dataset_digest(d));
  CHECK(pr.profile_digest == profile_digest(prof));
  CHECK(pr.auxset_digest == sha256_hex(serialize_auxset(aux)));
  cfg.seed = 18;
  CHECK_FALSE(train(d, &aux, &prof, cfg, kPlant).params.values == a.params.values);
}

TEST_CASE("training preconditions") {
  const Dataset d = linear_policy_dataset(50, 3);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.losses = LossSet::parse("l1,l3");
  CHECK_THROWS_AS(train(d, nullptr, nullptr, cfg, kPlant), std::invalid_argument);
  cfg.losses = LossSet{};
  cfg.aux = true;
  CHECK_THROWS_AS(train(d, nullptr, nullptr, cfg, kPlant), std::invalid_argument);
  cfg.aux = false;
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(d, nullptr, nullptr, cfg, kPlant), std::invalid_argument);
  cfg.epochs = 1;
  cfg.adam.learning_rate = 0.0;
  CHECK_THROWS_AS(train(d, nullptr, nullptr, cfg, kPlant), std::invalid_argument);
  CHECK_THROWS_AS(train(Dataset{}, nullptr, nullptr, TrainConfig{}, kPlant), std::invalid_argument);
}

TEST_CASE("non-finite loss aborts training with the location") {
  Dataset d = linear_policy_dataset(50, 4);
  d.samples[7].u_c[0] = std::numeric_limits<double>::infinity();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 0;
  try {
    train(d, nullptr, nullptr, cfg, kPlant);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() == 0);
    CHECK(e.batch() == 0);
    CHECK(e.last_finite().values == init_params(cfg.seed).values);
  }
}

TEST_CASE("model file round-trip") {
  const Dataset d = linear_policy_dataset(200, 5);
  TrainConfig cfg;
  cfg.epochs = 2;
  const SurrogateParams mu = train(d, nullptr, nullptr, cfg, kPlant).params;
  testing::TempDir dir("model");
  save_model(mu, dir / "m.txt");
  const SurrogateParams back = load_model(dir / "m.txt");
  CHECK(back == mu);
  CHECK(back.values.size() == 312);
  const std::string text = read_file(dir / "m.txt");
  CHECK(text.rfind("# pimpcs-model v1\ndims=6,10,10,10,2; act=sigmoid\n", 0) == 0);
  CHECK(text.find("\n# sha256=" + model_digest(mu) + "\n") != std::string::npos);
}

TEST_CASE("model parse errors") {
  SurrogateParams mu = init_params(3);
  const std::string good = seal_with_digest(serialize_model(mu));
  auto kind_of = [](const std::string& text) {
    try {
      parse_model(text);
    } catch (const FormatError& e) {
      return e.kind();
    }
    FAIL("expected FormatError");
    return FormatError::Kind::kIo;
  };
  std::string v2 = good;
  v2.replace(v2.find("v1"), 2, "v2");
  CHECK(kind_of(v2) == FormatError::Kind::kVersion);
  std::string edited = good;
  const std::size_t pos = edited.find("\n", edited.find("# provenance")) + 1;
  edited[pos] = edited[pos] == '-' ? '1' : '-';
  CHECK(kind_of(edited) == FormatError::Kind::kChecksum);
  CHECK(kind_of(serialize_model(mu)) == FormatError::Kind::kMalformedRow);
  std::string arch = serialize_model(mu);
  arch.replace(arch.find("act=sigmoid"), 11, "act=relu");
  CHECK(kind_of(seal_with_digest(arch)) == FormatError::Kind::kContent);
}
