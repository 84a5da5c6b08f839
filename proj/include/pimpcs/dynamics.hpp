#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pimpcs/numerics.hpp"

namespace pimpcs {

// s = (x, y, theta, xdot, ydot, thetadot); y is altitude.
using State = Vec6;
// (u_r, u_l) rotor thrusts.
using Control = Vec2;

enum StateIndex : std::size_t { kX = 0, kY, kTheta, kXDot, kYDot, kThetaDot };

struct PlantParams {
  double mass = 1.0;
  double half_length = 0.3;
  double inertia = 0.2;
  double gravity = 9.81;
  // Stabilizer gain, u_s = kappa * s. Position columns are zero.
  Mat<2, 6> kappa = default_kappa();

  // Pole placement on the hover linearization: lateral/tilt chain at a
  // triple pole of -2, vertical rate at -2.
  static Mat<2, 6> default_kappa();

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Continuous-time state derivative f(s, u) for the net thrust u.
Vec6 derivative(const State& s, const Control& u, const PlantParams& p);

// df/ds and df/du evaluated at (s, u).
struct PlantJacobians {
  Mat6 ds;
  Mat<6, 2> du;
};
PlantJacobians derivative_jacobians(const State& s, const Control& u, const PlantParams& p);

// u_e = (mg/2, mg/2).
Control equilibrium_control(const PlantParams& p);
// u_e + kappa * s.
Control stabilizer_control(const State& s, const PlantParams& p);
// u_e + kappa * s + u_c.
Control net_control(const State& s, const Control& u_c, const PlantParams& p);

State euler_step(const State& s, const Control& u, double dt, const PlantParams& p);
State rk4_step(const State& s, const Control& u, double dt, const PlantParams& p);

// Autonomous vector field s' = field(s); feedback is re-evaluated at every stage.
using VectorField = std::function<Vec6(const State&)>;
State euler_step(const State& s, const VectorField& field, double dt);
State rk4_step(const State& s, const VectorField& field, double dt);

// f(s, u_e + kappa * s), the continuous closed stabilizer loop.
Vec6 stabilized_derivative(const State& s, const PlantParams& p);

// Receives the observed state, returns the controller term u_c.
using Policy = std::function<Control(const State&)>;

struct Trajectory {
  double control_dt = 0.05;
  std::vector<State> states;      // ticks + 1 entries
  std::vector<Control> controls;  // u_c per tick

  std::size_t ticks() const { return controls.size(); }
};

class SimulationError : public std::runtime_error {
 public:
  enum class Kind { kCallback, kDivergence };
  SimulationError(Kind kind, std::size_t tick, const std::string& what, Trajectory partial);
  Kind kind() const { return kind_; }
  std::size_t tick() const { return tick_; }
  const Trajectory& partial() const { return partial_; }

 private:
  Kind kind_;
  std::size_t tick_;
  Trajectory partial_;
};

struct SimulationSettings {
  double duration = 15.0;
  double control_dt = 0.05;
  int substeps = 5;

  std::size_t ticks() const;
  void validate() const;
};

// Zero-order hold loop: at each tick the policy sees s(k), the plant integrates
// u_e + u_s(s(k)) + u_c(k) over control_dt with `substeps` RK4 steps.
Trajectory simulate(const State& s0, const Policy& controller, const SimulationSettings& sim,
                    const PlantParams& p);

}  // namespace pimpcs
