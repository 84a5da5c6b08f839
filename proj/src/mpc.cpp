#include "pimpcs/mpc.hpp"

#include <algorithm>
#include <cmath>

namespace pimpcs {

void MpcConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("mpc_horizon must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("mpc dt must be positive");
  for (double w : state_weight.data)
    if (!(w >= 0.0)) throw std::invalid_argument("mpc_q entries must be >= 0");
  for (double w : input_weight.data)
    if (!(w >= 0.0)) throw std::invalid_argument("mpc_r entries must be >= 0");
  for (double w : terminal_weight.data)
    if (!(w >= 0.0)) throw std::invalid_argument("mpc_qf entries must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("mpc_max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("mpc_tol must be positive");
  if (!(reg_init >= 0.0)) throw std::invalid_argument("mpc reg_init must be >= 0");
}

namespace {

constexpr double kRegFloor = 1e-9;
constexpr double kRegCeil = 1e10;
constexpr std::array<double, 10> kStepSizes{1.0,    0.5,     0.25,     0.125,     0.0625,
                                            0.03125, 0.015625, 0.0078125, 0.00390625, 0.001};

State closed_loop_step(const State& s, const Control& u_c, const MpcConfig& cfg,
                       const PlantParams& p) {
  return euler_step(s, net_control(s, u_c, p), cfg.dt, p);
}

double stage_cost(const State& s, const Control& u, const MpcConfig& cfg) {
  double c = 0.0;
  for (std::size_t i = 0; i < 6; ++i) c += cfg.state_weight[i] * s[i] * s[i];
  for (std::size_t i = 0; i < 2; ++i) c += cfg.input_weight[i] * u[i] * u[i];
  return c;
}

double terminal_cost(const State& s, const Mat6& qf) { return dot(s, qf * s); }

Mat<2, 2> inverse2(const Mat<2, 2>& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat<2, 2> inv;
  inv(0, 0) = m(1, 1) / det;
  inv(1, 1) = m(0, 0) / det;
  inv(0, 1) = -m(0, 1) / det;
  inv(1, 0) = -m(1, 0) / det;
  return inv;
}

bool same_config(const MpcConfig& a, const MpcConfig& b) {
  return a.horizon == b.horizon && a.dt == b.dt && a.state_weight == b.state_weight &&
         a.input_weight == b.input_weight && a.terminal_weight == b.terminal_weight &&
         a.terminal == b.terminal;
}

bool same_plant(const PlantParams& a, const PlantParams& b) {
  return a.mass == b.mass && a.half_length == b.half_length && a.inertia == b.inertia &&
         a.gravity == b.gravity && a.kappa == b.kappa;
}

struct Rollout {
  std::vector<State> states;
  double cost = 0.0;
};

Rollout rollout(const State& s0, const std::vector<Control>& u, const MpcConfig& cfg,
                const Mat6& qf, const PlantParams& p) {
  Rollout r;
  r.states.resize(u.size() + 1);
  r.states[0] = s0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    r.cost += stage_cost(r.states[t], u[t], cfg);
    r.states[t + 1] = closed_loop_step(r.states[t], u[t], cfg, p);
  }
  r.cost += terminal_cost(r.states.back(), qf);
  return r;
}

struct Gains {
  std::vector<Vec2> k;
  std::vector<Mat<2, 6>> K;
  double expected_linear = 0.0;     // sum k^T Q_u
  double expected_quadratic = 0.0;  // sum k^T Q_uu k / 2
};

// Returns false when Q_uu is not positive definite at the given regularization.
bool backward_pass(const Rollout& ro, const std::vector<Control>& u, const MpcConfig& cfg,
                   const Mat6& qf, const PlantParams& p, double reg, Gains& g) {
  const std::size_t H = u.size();
  g.k.assign(H, Vec2{});
  g.K.assign(H, Mat<2, 6>{});
  g.expected_linear = 0.0;
  g.expected_quadratic = 0.0;

  Vec6 vx = 2.0 * (qf * ro.states[H]);
  Mat6 vxx = 2.0 * qf;

  for (std::size_t t = H; t-- > 0;) {
    const State& s = ro.states[t];
    const Control u_net = net_control(s, u[t], p);
    const PlantJacobians jac = derivative_jacobians(s, u_net, p);
    // Closed loop: F(s, u_c) = s + dt f(s, u_e + kappa s + u_c).
    Mat6 A = Mat6::identity() + cfg.dt * (jac.ds + jac.du * p.kappa);
    Mat<6, 2> B = cfg.dt * jac.du;

    Vec6 qx = transpose_times(A, vx);
    Vec2 qu = transpose_times(B, vx);
    for (std::size_t i = 0; i < 6; ++i) qx[i] += 2.0 * cfg.state_weight[i] * s[i];
    for (std::size_t i = 0; i < 2; ++i) qu[i] += 2.0 * cfg.input_weight[i] * u[t][i];

    const Mat6 vxxA = vxx * A;
    const Mat<6, 2> vxxB = vxx * B;
    Mat6 qxx = transpose(A) * vxxA;
    Mat<2, 2> quu = transpose(B) * vxxB;
    const Mat<2, 6> qux = transpose(B) * vxxA;
    for (std::size_t i = 0; i < 6; ++i) qxx(i, i) += 2.0 * cfg.state_weight[i];
    for (std::size_t i = 0; i < 2; ++i) quu(i, i) += 2.0 * cfg.input_weight[i];

    Mat<2, 2> quu_reg = quu;
    quu_reg(0, 0) += reg;
    quu_reg(1, 1) += reg;
    const double det = quu_reg(0, 0) * quu_reg(1, 1) - quu_reg(0, 1) * quu_reg(1, 0);
    if (!(quu_reg(0, 0) > 0.0) || !(det > 0.0)) return false;
    Mat<2, 2> inv;
    inv(0, 0) = quu_reg(1, 1) / det;
    inv(1, 1) = quu_reg(0, 0) / det;
    inv(0, 1) = -quu_reg(0, 1) / det;
    inv(1, 0) = -quu_reg(1, 0) / det;

    const Vec2 k = -(inv * qu);
    const Mat<2, 6> K = -1.0 * (inv * qux);
    g.k[t] = k;
    g.K[t] = K;
    g.expected_linear += dot(k, qu);
    g.expected_quadratic += 0.5 * dot(k, quu * k);

    // V_x = Q_x + K^T Q_uu k + K^T Q_u + Q_ux^T k
    vx = qx + transpose_times(K, quu * k) + transpose_times(K, qu) + transpose_times(qux, k);
    // V_xx = Q_xx + K^T Q_uu K + K^T Q_ux + Q_ux^T K
    const Mat6 kt_quu_k = transpose(K) * (quu * K);
    const Mat6 kt_qux = transpose(K) * qux;
    vxx = qxx + kt_quu_k + kt_qux + transpose(kt_qux);
    vxx = SymMat6::symmetrize(vxx).mat();
  }
  return true;
}

}  // namespace

Mat6 hover_lqr_cost_to_go(const MpcConfig& cfg, const PlantParams& p) {
  const PlantJacobians jac = derivative_jacobians(State{}, equilibrium_control(p), p);
  const Mat6 A = Mat6::identity() + cfg.dt * (jac.ds + jac.du * p.kappa);
  const Mat<6, 2> B = cfg.dt * jac.du;
  const Mat6 Q = diag(cfg.state_weight);
  const Mat<2, 2> R = diag(cfg.input_weight);
  Mat6 P = Q;
  constexpr int kMaxRiccatiIters = 100000;
  for (int it = 0; it < kMaxRiccatiIters; ++it) {
    const Mat6 PA = P * A;
    const Mat<6, 2> PB = P * B;
    const Mat<2, 6> K = inverse2(R + transpose(B) * PB) * (transpose(B) * PA);
    const Mat6 next =
        SymMat6::symmetrize(Q + transpose(A) * PA - transpose(A) * PB * K).mat();
    if (!all_finite(next)) break;
    const double change = max_abs(next - P);
    P = next;
    if (change <= 1e-12 * std::max(1.0, max_abs(P))) return P;
  }
  throw std::runtime_error(
      "hover LQR cost-to-go did not converge; check mpc_q, mpc_r and the stabilizer gain");
}

Mat6 terminal_weight_matrix(const MpcConfig& cfg, const PlantParams& p) {
  if (cfg.terminal == TerminalCost::kDiagonal) return diag(cfg.terminal_weight);
  struct Memo {
    MpcConfig cfg;
    PlantParams plant;
    Mat6 qf;
  };
  thread_local std::optional<Memo> memo;
  if (!memo || !same_config(memo->cfg, cfg) || !same_plant(memo->plant, p))
    memo = Memo{cfg, p, hover_lqr_cost_to_go(cfg, p)};
  return memo->qf;
}

double plan_cost(const State& s, const std::vector<Control>& controls, const MpcConfig& cfg,
                 const PlantParams& p) {
  return rollout(s, controls, cfg, terminal_weight_matrix(cfg, p), p).cost;
}

ControlPlan mpc_solve(const State& s, const std::optional<ControlPlan>& warm,
                      const MpcConfig& cfg, const PlantParams& p) {
  cfg.validate();
  if (!all_finite(s)) throw std::invalid_argument("mpc_solve: non-finite state");
  const auto H = static_cast<std::size_t>(cfg.horizon);
  const Mat6 qf = terminal_weight_matrix(cfg, p);

  std::vector<Control> u(H, Control{});
  Rollout ro;
  if (warm && warm->controls.size() == H && warm->states.size() == H + 1 &&
      warm->gains.size() == H) {
    ro.states.resize(H + 1);
    ro.states[0] = s;
    for (std::size_t t = 0; t < H; ++t) {
      u[t] = warm->controls[t] + warm->gains[t] * (ro.states[t] - warm->states[t]);
      ro.cost += stage_cost(ro.states[t], u[t], cfg);
      ro.states[t + 1] = closed_loop_step(ro.states[t], u[t], cfg, p);
    }
    ro.cost += terminal_cost(ro.states[H], qf);
    // Fall back to the open-loop replay if the policy rollout is worse.
    const Rollout open = rollout(s, warm->controls, cfg, qf, p);
    if (!(ro.cost <= open.cost)) {
      u = warm->controls;
      ro = open;
    }
  } else {
    if (warm && warm->controls.size() == H) u = warm->controls;
    ro = rollout(s, u, cfg, qf, p);
  }
  if (!std::isfinite(ro.cost)) {
    ControlPlan zero;
    zero.controls.assign(H, Control{});
    throw MpcDivergenceError("mpc_solve: initial rollout cost is not finite", std::move(zero));
  }

  double reg = std::max(cfg.reg_init, kRegFloor);
  ControlPlan plan;
  plan.converged = false;
  int iter = 0;
  Gains g;
  std::vector<Control> u_new(H);
  std::vector<State> s_new(H + 1);
  while (iter < cfg.max_iters) {
    ++iter;
    if (!backward_pass(ro, u, cfg, qf, p, reg, g)) {
      reg *= 10.0;
      if (reg > kRegCeil) break;
      continue;
    }
    const double scale = cfg.tol * (1.0 + ro.cost);
    if (-(g.expected_linear + g.expected_quadratic) <= scale) {
      plan.converged = true;
      break;
    }

    bool accepted = false;
    double cost_new = 0.0;
    for (double alpha : kStepSizes) {
      cost_new = 0.0;
      s_new[0] = s;
      for (std::size_t t = 0; t < H; ++t) {
        u_new[t] = u[t] + alpha * g.k[t] + g.K[t] * (s_new[t] - ro.states[t]);
        cost_new += stage_cost(s_new[t], u_new[t], cfg);
        s_new[t + 1] = closed_loop_step(s_new[t], u_new[t], cfg, p);
      }
      cost_new += terminal_cost(s_new[H], qf);
      if (std::isfinite(cost_new) && cost_new < ro.cost) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      reg *= 10.0;
      if (reg > kRegCeil) break;
      continue;
    }

    const double improvement = ro.cost - cost_new;
    u.swap(u_new);
    ro.states.swap(s_new);
    ro.cost = cost_new;
    reg = std::max(reg / 2.0, kRegFloor);
    if (improvement <= scale) {
      plan.converged = true;
      break;
    }
  }

  plan.controls = std::move(u);
  plan.states = std::move(ro.states);
  plan.gains = g.K.size() == H ? g.K : std::vector<Mat<2, 6>>(H, Mat<2, 6>{});
  plan.cost = ro.cost;
  plan.iterations = iter;
  return plan;
}

ControlPlan shift_plan(const ControlPlan& plan, const MpcConfig& cfg, const PlantParams& p) {
  ControlPlan out = plan;
  auto& c = out.controls;
  auto& g = out.gains;
  auto& st = out.states;
  const bool has_policy = st.size() == c.size() + 1 && g.size() == c.size() && !c.empty();
  if (!c.empty()) std::rotate(c.begin(), c.begin() + 1, c.end());
  if (!has_policy) {
    if (!c.empty()) c.back() = Control{};
    st.clear();
    g.clear();
    return out;
  }
  std::rotate(g.begin(), g.begin() + 1, g.end());
  std::rotate(st.begin(), st.begin() + 1, st.end());
  // Tail step: the last feedback gain applied about the origin.
  const std::size_t H = c.size();
  g[H - 1] = g[H - 2];
  c[H - 1] = g[H - 1] * st[H - 1];
  st[H] = closed_loop_step(st[H - 1], c[H - 1], cfg, p);
  return out;
}

MpcController::MpcController(MpcConfig cfg, PlantParams p)
    : cfg_(std::move(cfg)), plant_(std::move(p)) {
  cfg_.validate();
}

void MpcController::reset() {
  last_.reset();
  iterations_.clear();
}

Control MpcController::operator()(const State& s) {
  std::optional<ControlPlan> warm;
  if (last_) warm = shift_plan(*last_, cfg_, plant_);
  ControlPlan plan = mpc_solve(s, warm, cfg_, plant_);
  iterations_.push_back(plan.iterations);
  const Control first = plan.controls.front();
  last_ = std::move(plan);
  return first;
}

Policy mpc_controller(const MpcConfig& cfg, const PlantParams& p) {
  auto ctl = std::make_shared<MpcController>(cfg, p);
  return [ctl](const State& s) { return (*ctl)(s); };
}

}  // namespace pimpcs
