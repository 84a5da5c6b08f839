#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pimpcs/dynamics.hpp"

namespace pimpcs {

// Terminal cost s_H^T Q_f s_H: kLqr uses the infinite-horizon cost-to-go of
// the hover linearization (so shifted plans stay near optimal), kDiagonal uses
// diag(terminal_weight).
enum class TerminalCost { kLqr, kDiagonal };

struct MpcConfig {
  int horizon = 30;
  double dt = 0.05;
  Vec6 state_weight{{10.0, 10.0, 1.0, 1.0, 1.0, 1.0}};
  Vec2 input_weight{{15.0, 15.0}};
  Vec6 terminal_weight{{100.0, 100.0, 10.0, 10.0, 10.0, 10.0}};
  TerminalCost terminal = TerminalCost::kLqr;
  int max_iters = 100;
  double tol = 1e-6;
  double reg_init = 1e-6;

  void validate() const;
};

struct ControlPlan {
  std::vector<Control> controls;  // controller terms u_c, one per horizon step
  // Nominal Euler states (horizon + 1) and the last backward pass's feedback
  // gains (horizon). When both are present a warm start follows the policy
  // u_t + K_t (s_t - states_t) instead of replaying the controls open loop.
  std::vector<State> states;
  std::vector<Mat<2, 6>> gains;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

class MpcDivergenceError : public std::runtime_error {
 public:
  MpcDivergenceError(const std::string& what, ControlPlan last_finite)
      : std::runtime_error(what), last_finite_(std::move(last_finite)) {}
  const ControlPlan& last_finite() const { return last_finite_; }

 private:
  ControlPlan last_finite_;
};

// Stabilizing solution of the discrete Riccati equation for the Euler
// closed loop linearized at hover with weights Q and R. Throws
// std::runtime_error if the iteration does not converge.
Mat6 hover_lqr_cost_to_go(const MpcConfig& cfg, const PlantParams& p);

// The Q_f the solver uses for (cfg, p); memoized per thread.
Mat6 terminal_weight_matrix(const MpcConfig& cfg, const PlantParams& p);

// Cost of a control sequence from s under the Euler-discretized closed loop.
double plan_cost(const State& s, const std::vector<Control>& controls, const MpcConfig& cfg,
                 const PlantParams& p);

// iLQR with Levenberg regularization and backtracking line search. The returned
// plan never costs more than the warm start (zero plan when absent).
ControlPlan mpc_solve(const State& s, const std::optional<ControlPlan>& warm,
                      const MpcConfig& cfg, const PlantParams& p);

// The plan advanced one step: controls, states and gains drop their first
// entry; the tail repeats the last gain with a zero control.
ControlPlan shift_plan(const ControlPlan& plan, const MpcConfig& cfg, const PlantParams& p);

// Receding-horizon controller; warm-starts each solve with the previous plan
// shifted one step. One instance per simulation.
class MpcController {
 public:
  MpcController(MpcConfig cfg, PlantParams p);

  Control operator()(const State& s);

  const std::vector<int>& iteration_log() const { return iterations_; }
  const std::optional<ControlPlan>& last_plan() const { return last_; }
  void reset();

 private:
  MpcConfig cfg_;
  PlantParams plant_;
  std::optional<ControlPlan> last_;
  std::vector<int> iterations_;
};

// Policy adapter sharing ownership of a fresh controller.
Policy mpc_controller(const MpcConfig& cfg, const PlantParams& p);

}  // namespace pimpcs
