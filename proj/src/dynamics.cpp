#include "pimpcs/dynamics.hpp"

#include <cmath>
#include <exception>
#include <sstream>

namespace pimpcs {

Mat<2, 6> PlantParams::default_kappa() {
  constexpr double kPole = 2.0;
  constexpr double kVerticalPole = 2.0;
  const double beta = 0.3 / 0.2;  // half_length / inertia
  const double g = 9.81;
  // Closed lateral chain (xdot, theta, thetadot) has characteristic polynomial
  // l^3 - beta*k_w l^2 - beta*k_t l + g*beta*k_v; match (l + kPole)^3.
  const double k_w = -3.0 * kPole / beta;
  const double k_t = -3.0 * kPole * kPole / beta;
  const double k_v = kPole * kPole * kPole / (g * beta);
  Mat<2, 6> k;
  // Differential thrust u_r - u_l is split evenly between the rotors.
  k(0, kTheta) = 0.5 * k_t;
  k(1, kTheta) = -0.5 * k_t;
  k(0, kXDot) = 0.5 * k_v;
  k(1, kXDot) = -0.5 * k_v;
  k(0, kThetaDot) = 0.5 * k_w;
  k(1, kThetaDot) = -0.5 * k_w;
  k(0, kYDot) = -0.5 * kVerticalPole;
  k(1, kYDot) = -0.5 * kVerticalPole;
  return k;
}

void PlantParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("plant parameter '") + name +
                                  "' must be positive and finite");
  };
  positive(mass, "mass");
  positive(half_length, "half_length");
  positive(inertia, "inertia");
  positive(gravity, "gravity");
  if (!all_finite(kappa)) throw std::invalid_argument("kappa has non-finite entries");
  for (std::size_t r = 0; r < 2; ++r)
    if (kappa(r, kX) != 0.0 || kappa(r, kY) != 0.0)
      throw std::invalid_argument("kappa position columns (x, y) must be zero");
}

Vec6 derivative(const State& s, const Control& u, const PlantParams& p) {
  const double thrust = u[0] + u[1];
  const double st = std::sin(s[kTheta]);
  const double ct = std::cos(s[kTheta]);
  return Vec6{{s[kXDot], s[kYDot], s[kThetaDot], -st * thrust / p.mass,
               (ct * thrust - p.gravity) / p.mass,
               p.half_length * (u[0] - u[1]) / p.inertia}};
}

PlantJacobians derivative_jacobians(const State& s, const Control& u, const PlantParams& p) {
  const double thrust = u[0] + u[1];
  const double st = std::sin(s[kTheta]);
  const double ct = std::cos(s[kTheta]);
  PlantJacobians j;
  j.ds(kX, kXDot) = 1.0;
  j.ds(kY, kYDot) = 1.0;
  j.ds(kTheta, kThetaDot) = 1.0;
  j.ds(kXDot, kTheta) = -ct * thrust / p.mass;
  j.ds(kYDot, kTheta) = -st * thrust / p.mass;
  const double arm = p.half_length / p.inertia;
  j.du(kXDot, 0) = j.du(kXDot, 1) = -st / p.mass;
  j.du(kYDot, 0) = j.du(kYDot, 1) = ct / p.mass;
  j.du(kThetaDot, 0) = arm;
  j.du(kThetaDot, 1) = -arm;
  return j;
}

Control equilibrium_control(const PlantParams& p) {
  const double half = 0.5 * p.mass * p.gravity;
  return Control{{half, half}};
}

Control stabilizer_control(const State& s, const PlantParams& p) {
  return equilibrium_control(p) + p.kappa * s;
}

Control net_control(const State& s, const Control& u_c, const PlantParams& p) {
  return stabilizer_control(s, p) + u_c;
}

State euler_step(const State& s, const Control& u, double dt, const PlantParams& p) {
  return s + dt * derivative(s, u, p);
}

State rk4_step(const State& s, const Control& u, double dt, const PlantParams& p) {
  const Vec6 k1 = derivative(s, u, p);
  const Vec6 k2 = derivative(s + (0.5 * dt) * k1, u, p);
  const Vec6 k3 = derivative(s + (0.5 * dt) * k2, u, p);
  const Vec6 k4 = derivative(s + dt * k3, u, p);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

State euler_step(const State& s, const VectorField& field, double dt) {
  return s + dt * field(s);
}

State rk4_step(const State& s, const VectorField& field, double dt) {
  const Vec6 k1 = field(s);
  const Vec6 k2 = field(s + (0.5 * dt) * k1);
  const Vec6 k3 = field(s + (0.5 * dt) * k2);
  const Vec6 k4 = field(s + dt * k3);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec6 stabilized_derivative(const State& s, const PlantParams& p) {
  return derivative(s, stabilizer_control(s, p), p);
}

SimulationError::SimulationError(Kind kind, std::size_t tick, const std::string& what,
                                 Trajectory partial)
    : std::runtime_error(what), kind_(kind), tick_(tick), partial_(std::move(partial)) {}

std::size_t SimulationSettings::ticks() const {
  return static_cast<std::size_t>(std::llround(duration / control_dt));
}

void SimulationSettings::validate() const {
  if (!(control_dt > 0.0)) throw std::invalid_argument("control_dt must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const double ratio = duration / control_dt;
  if (std::fabs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("control_dt must divide duration");
}

Trajectory simulate(const State& s0, const Policy& controller, const SimulationSettings& sim,
                    const PlantParams& p) {
  sim.validate();
  const std::size_t n = sim.ticks();
  const double h = sim.control_dt / sim.substeps;
  Trajectory traj;
  traj.control_dt = sim.control_dt;
  traj.states.reserve(n + 1);
  traj.controls.reserve(n);
  traj.states.push_back(s0);
  State s = s0;
  for (std::size_t k = 0; k < n; ++k) {
    Control u_c;
    try {
      u_c = controller(s);
    } catch (const std::exception& e) {
      throw SimulationError(SimulationError::Kind::kCallback, k,
                            std::string("controller failed at tick ") + std::to_string(k) +
                                ": " + e.what(),
                            std::move(traj));
    }
    const Control u = net_control(s, u_c, p);
    for (int i = 0; i < sim.substeps; ++i) s = rk4_step(s, u, h, p);
    if (!all_finite(s) || !all_finite(u_c)) {
      throw SimulationError(SimulationError::Kind::kDivergence, k,
                            "state diverged at tick " + std::to_string(k), std::move(traj));
    }
    traj.controls.push_back(u_c);
    traj.states.push_back(s);
  }
  return traj;
}

}  // namespace pimpcs
