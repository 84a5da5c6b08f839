#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace pimpcs {

// Fixed-dimension dense vector. Value type, contiguous storage.
template <std::size_t N>
struct Vec {
  std::array<double, N> data{};

  static constexpr std::size_t size() { return N; }

  constexpr double& operator[](std::size_t i) { return data[i]; }
  constexpr const double& operator[](std::size_t i) const { return data[i]; }

  static Vec zero() { return Vec{}; }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) data[i] += o.data[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) data[i] -= o.data[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (auto& v : data) v *= a;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend bool operator==(const Vec& a, const Vec& b) = default;
};

using Vec2 = Vec<2>;
using Vec6 = Vec<6>;

template <std::size_t N>
double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
double max_abs(const Vec<N>& a) {
  double m = 0.0;
  for (double v : a.data) m = std::fmax(m, std::fabs(v));
  return m;
}

template <std::size_t N>
bool all_finite(const Vec<N>& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

// Row-major fixed-size matrix.
template <std::size_t R, std::size_t C>
struct Mat {
  std::array<double, R * C> data{};

  static constexpr std::size_t rows() { return R; }
  static constexpr std::size_t cols() { return C; }

  constexpr double& operator()(std::size_t i, std::size_t j) { return data[i * C + j]; }
  constexpr const double& operator()(std::size_t i, std::size_t j) const {
    return data[i * C + j];
  }

  static Mat zero() { return Mat{}; }
  static Mat identity() {
    static_assert(R == C);
    Mat m;
    for (std::size_t i = 0; i < R; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < R * C; ++i) data[i] += o.data[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < R * C; ++i) data[i] -= o.data[i];
    return *this;
  }
  Mat& operator*=(double a) {
    for (auto& v : data) v *= a;
    return *this;
  }
  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend bool operator==(const Mat& a, const Mat& b) = default;

  Vec<C> row(std::size_t i) const {
    Vec<C> r;
    for (std::size_t j = 0; j < C; ++j) r[j] = (*this)(i, j);
    return r;
  }
  Vec<R> col(std::size_t j) const {
    Vec<R> c;
    for (std::size_t i = 0; i < R; ++i) c[i] = (*this)(i, j);
    return c;
  }
};

using Mat6 = Mat<6, 6>;

template <std::size_t R, std::size_t K, std::size_t C>
Mat<R, C> operator*(const Mat<R, K>& a, const Mat<K, C>& b) {
  Mat<R, C> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < C; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

template <std::size_t R, std::size_t C>
Vec<R> operator*(const Mat<R, C>& a, const Vec<C>& x) {
  Vec<R> out;
  for (std::size_t i = 0; i < R; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < C; ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

template <std::size_t R, std::size_t C>
Mat<C, R> transpose(const Mat<R, C>& a) {
  Mat<C, R> t;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) t(j, i) = a(i, j);
  return t;
}

// x^T a, i.e. a^T x.
template <std::size_t R, std::size_t C>
Vec<C> transpose_times(const Mat<R, C>& a, const Vec<R>& x) {
  Vec<C> out;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) out[j] += a(i, j) * x[i];
  return out;
}

template <std::size_t R, std::size_t C>
Mat<R, C> outer(const Vec<R>& a, const Vec<C>& b) {
  Mat<R, C> m;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) m(i, j) = a[i] * b[j];
  return m;
}

template <std::size_t R, std::size_t C>
double max_abs(const Mat<R, C>& a) {
  double m = 0.0;
  for (double v : a.data) m = std::fmax(m, std::fabs(v));
  return m;
}

template <std::size_t R, std::size_t C>
bool all_finite(const Mat<R, C>& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

template <std::size_t N>
Mat<N, N> diag(const Vec<N>& d) {
  Mat<N, N> m;
  for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
  return m;
}

// Symmetric 6x6 matrix. Full storage; every mutator keeps M == M^T exactly.
class SymMat6 {
 public:
  SymMat6() = default;

  static SymMat6 identity() { return SymMat6(Mat6::identity()); }
  static SymMat6 diagonal(const Vec6& d) { return SymMat6(diag(d)); }
  // Throws std::invalid_argument unless m is exactly symmetric.
  static SymMat6 from_symmetric(const Mat6& m);
  // (m + m^T) / 2.
  static SymMat6 symmetrize(const Mat6& m);
  // v v^T.
  static SymMat6 outer(const Vec6& v);

  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Mat6& mat() const { return m_; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < 6; ++i) t += m_(i, i);
    return t;
  }

  // v^T M v
  double quad(const Vec6& v) const;

  SymMat6& operator+=(const SymMat6& o) {
    m_ += o.m_;
    return *this;
  }
  SymMat6& operator-=(const SymMat6& o) {
    m_ -= o.m_;
    return *this;
  }
  SymMat6& operator*=(double a) {
    m_ *= a;
    return *this;
  }
  friend SymMat6 operator+(SymMat6 a, const SymMat6& b) { return a += b; }
  friend SymMat6 operator-(SymMat6 a, const SymMat6& b) { return a -= b; }
  friend SymMat6 operator*(SymMat6 a, double s) { return a *= s; }
  friend SymMat6 operator*(double s, SymMat6 a) { return a *= s; }
  friend bool operator==(const SymMat6& a, const SymMat6& b) = default;

 private:
  explicit SymMat6(const Mat6& m) : m_(m) {}
  Mat6 m_{};
};

class EigenConvergenceError : public std::runtime_error {
 public:
  EigenConvergenceError(int sweeps, double off_norm);
  int sweeps() const { return sweeps_; }
  double off_norm() const { return off_norm_; }

 private:
  int sweeps_;
  double off_norm_;
};

struct SymEigen {
  Vec6 values;   // ascending
  Mat6 vectors;  // column i pairs with values[i]
};

inline constexpr int kJacobiMaxSweeps = 50;

// Cyclic Jacobi eigendecomposition. Throws EigenConvergenceError after
// kJacobiMaxSweeps sweeps without convergence.
SymEigen jacobi_eigen_sym(const SymMat6& m);

// Q diag(values) Q^T
SymMat6 reconstruct(const Mat6& vectors, const Vec6& values);

// Clamps eigenvalues from below at eps.
SymMat6 project_pd(const SymMat6& m, double eps = 1e-6);

// Euclidean projection onto {P : lambda_min(P) >= eps, trace(P) = trace_target}.
SymMat6 project_pd_trace(const SymMat6& m, double eps, double trace_target);

// Tr(AB) for symmetric operands, computed as sum_ij a_ij b_ij.
double trace_product(const SymMat6& a, const SymMat6& b);

}  // namespace pimpcs
