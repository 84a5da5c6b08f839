#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "pimpcs/numerics.hpp"

namespace testing {

inline pimpcs::SymMat6 random_symmetric(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  pimpcs::SymMat6 m;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i; j < 6; ++j) m.set(i, j, u(rng));
  return m;
}

inline pimpcs::Vec6 random_vec6(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  pimpcs::Vec6 v;
  for (double& x : v.data) x = u(rng);
  return v;
}

// Plain triple loop, independent of the library's Mat product.
inline pimpcs::Mat6 naive_product(const pimpcs::Mat6& a, const pimpcs::Mat6& b) {
  pimpcs::Mat6 c;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pimpcs_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

#include <vector>

#include "pimpcs/lyapunov.hpp"

namespace testing {

// Upper triangular with 0.9 on the diagonal: spectral radius 0.9, far from
// normal, so V = |s|^2 is not a Lyapunov function for it.
inline pimpcs::Mat6 nonnormal_contraction(double coupling = 0.3) {
  pimpcs::Mat6 a = pimpcs::Mat6::identity() * 0.9;
  for (std::size_t i = 0; i + 1 < 6; ++i) a(i, i + 1) = coupling;
  return a;
}

// Short trajectories of s+ = A s from random starts.
inline std::vector<pimpcs::StatePair> linear_map_pairs(const pimpcs::Mat6& a, std::size_t starts,
                                                       std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<pimpcs::StatePair> out;
  for (std::size_t n = 0; n < starts; ++n) {
    pimpcs::Vec6 s = random_vec6(rng, 1.0);
    for (std::size_t k = 0; k < steps; ++k) {
      const pimpcs::Vec6 next = a * s;
      out.push_back({s, next});
      s = next;
    }
  }
  return out;
}

}  // namespace testing
