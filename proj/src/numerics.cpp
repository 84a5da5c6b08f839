#include "pimpcs/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace pimpcs {

SymMat6 SymMat6::from_symmetric(const Mat6& m) {
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j)
      if (m(i, j) != m(j, i)) {
        std::ostringstream os;
        os << "matrix not symmetric at (" << i << "," << j << "): " << m(i, j) << " vs "
           << m(j, i);
        throw std::invalid_argument(os.str());
      }
  return SymMat6(m);
}

SymMat6 SymMat6::symmetrize(const Mat6& m) {
  Mat6 s;
  for (std::size_t i = 0; i < 6; ++i) {
    s(i, i) = m(i, i);
    for (std::size_t j = i + 1; j < 6; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return SymMat6(s);
}

SymMat6 SymMat6::outer(const Vec6& v) {
  Mat6 s;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i; j < 6; ++j) {
      const double p = v[i] * v[j];
      s(i, j) = p;
      s(j, i) = p;
    }
  return SymMat6(s);
}

double SymMat6::quad(const Vec6& v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < 6; ++j) r += m_(i, j) * v[j];
    s += v[i] * r;
  }
  return s;
}

EigenConvergenceError::EigenConvergenceError(int sweeps, double off_norm)
    : std::runtime_error("jacobi_eigen_sym: no convergence after " + std::to_string(sweeps) +
                         " sweeps, off-diagonal norm " + std::to_string(off_norm)),
      sweeps_(sweeps),
      off_norm_(off_norm) {}

namespace {

double off_diagonal_norm(const Mat6& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(2.0 * s);
}

}  // namespace

SymEigen jacobi_eigen_sym(const SymMat6& m) {
  Mat6 a = m.mat();
  Mat6 v = Mat6::identity();
  for (double x : a.data)
    if (!std::isfinite(x)) throw std::invalid_argument("jacobi_eigen_sym: non-finite input");

  const double scale = std::max(max_abs(a), 1e-300);
  int sweep = 0;
  for (; sweep < kJacobiMaxSweeps; ++sweep) {
    const double off = off_diagonal_norm(a);
    if (off <= 1e-15 * scale || off == 0.0) break;
    for (std::size_t p = 0; p < 5; ++p) {
      for (std::size_t q = p + 1; q < 6; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        // Rutishauser's rotation: t = tan of the rotation angle.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < 6; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = arp - s * (arq + tau * arp);
          a(p, r) = a(r, p);
          a(r, q) = arq + s * (arp - tau * arq);
          a(q, r) = a(r, q);
        }
        for (std::size_t r = 0; r < 6; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
  if (sweep == kJacobiMaxSweeps) {
    const double off = off_diagonal_norm(a);
    if (off > 1e-15 * scale) throw EigenConvergenceError(sweep, off);
  }

  std::array<std::size_t, 6> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEigen out;
  for (std::size_t k = 0; k < 6; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < 6; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

SymMat6 reconstruct(const Mat6& vectors, const Vec6& values) {
  Mat6 r;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += vectors(i, k) * values[k] * vectors(j, k);
      r(i, j) = s;
      r(j, i) = s;
    }
  return SymMat6::from_symmetric(r);
}

SymMat6 project_pd(const SymMat6& m, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("project_pd: eps must be positive");
  const SymEigen e = jacobi_eigen_sym(m);
  if (e.values[0] >= eps) return m;
  Vec6 clamped = e.values;
  for (auto& l : clamped.data) l = std::max(l, eps);
  return reconstruct(e.vectors, clamped);
}

SymMat6 project_pd_trace(const SymMat6& m, double eps, double trace_target) {
  if (!(eps > 0.0)) throw std::invalid_argument("project_pd_trace: eps must be positive");
  if (!(trace_target >= 6.0 * eps))
    throw std::invalid_argument("project_pd_trace: trace target below 6*eps");
  const SymEigen e = jacobi_eigen_sym(m);
  // Values ascending; find shift tau with sum_i max(l_i - tau, eps) = target.
  // The k largest eigenvalues stay above the floor.
  double tau = 0.0;
  double top_sum = 0.0;
  bool found = false;
  for (std::size_t k = 1; k <= 6; ++k) {
    top_sum += e.values[6 - k];
    tau = (top_sum + static_cast<double>(6 - k) * eps - trace_target) / static_cast<double>(k);
    const bool kth_above = e.values[6 - k] - tau > eps;
    const bool next_below = (k == 6) || (e.values[5 - k] - tau <= eps);
    if (kth_above && next_below) {
      found = true;
      break;
    }
  }
  Vec6 shifted;
  for (std::size_t i = 0; i < 6; ++i) shifted[i] = found ? std::max(e.values[i] - tau, eps) : eps;
  if (!found) shifted[5] = trace_target - 5.0 * eps;
  return reconstruct(e.vectors, shifted);
}

double trace_product(const SymMat6& a, const SymMat6& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) s += a(i, j) * b(i, j);
  return s;
}

}  // namespace pimpcs
