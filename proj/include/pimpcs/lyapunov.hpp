#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pimpcs/dataset.hpp"
#include "pimpcs/numerics.hpp"

namespace pimpcs {

// A state transition (s, s_plus) as seen by the quadratic Lyapunov candidate.
struct StatePair {
  State s{};
  State s_plus{};
};

std::vector<StatePair> state_pairs(const Dataset& d);

struct StabilityProfile {
  SymMat6 p = SymMat6::identity();
  double eps_floor = 1e-6;
  double final_objective = 0.0;
  // Fraction of transitions with V(s_plus) > V(s).
  double violation_fraction = 0.0;
  int iterations = 0;
  std::string dataset_digest;
};

inline constexpr double kProfileTrace = 6.0;

// V(s) = s^T P s
double lyapunov_value(const SymMat6& p, const State& s);
inline double lyapunov_value(const StabilityProfile& profile, const State& s) {
  return lyapunov_value(profile.p, s);
}

// sum_i max(V(s_plus_i) - V(s_i), 0). Reduction order is fixed by a constant
// partition count so the result does not depend on `jobs`.
double profile_objective(const SymMat6& p, std::span<const StatePair> data, unsigned jobs = 1);
double profile_objective(const SymMat6& p, const Dataset& d, unsigned jobs = 1);

double violation_fraction(const SymMat6& p, std::span<const StatePair> data);

struct FitOptions {
  double eps_floor = 1e-6;
  int max_iters = 2000;
  double step = 0.1;  // step size step / sqrt(t + 1)
  unsigned jobs = 1;
};

class ProfileFitError : public std::runtime_error {
 public:
  ProfileFitError(const std::string& what, int iteration, SymMat6 iterate)
      : std::runtime_error(what), iteration_(iteration), iterate_(iterate) {}
  int iteration() const { return iteration_; }
  const SymMat6& iterate() const { return iterate_; }

 private:
  int iteration_;
  SymMat6 iterate_;
};

// Projected subgradient descent from P = I over {lambda_min >= eps, trace = 6}.
// Returns the best iterate visited.
StabilityProfile fit_profile(std::span<const StatePair> data, const FitOptions& opts = {});
StabilityProfile fit_profile(const Dataset& d, const FitOptions& opts = {});

// Transitions whose V increases under p.
std::vector<StatePair> active_pairs(std::span<const StatePair> data, const SymMat6& p);

// lhs = sum (s_+^T P s_+ - s^T P s), rhs = Tr(C P) with C = X_+ X_+^T - X X^T.
std::pair<double, double> trace_reform_check(std::span<const StatePair> subset, const SymMat6& p);

std::string serialize_profile(const StabilityProfile& profile);
StabilityProfile parse_profile(std::string_view text);
// Digest of the serialized profile file.
std::string profile_digest(const StabilityProfile& profile);
void save_profile(const StabilityProfile& profile, const std::filesystem::path& path);
StabilityProfile load_profile(const std::filesystem::path& path);

}  // namespace pimpcs
