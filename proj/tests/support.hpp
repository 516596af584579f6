#pragma once

// Test-only helpers: random problem generators and independent oracles.
// Nothing here calls into the solver code it is used to check.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace testing {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_positive(Index rows, Index cols, std::mt19937_64& gen,
                                double lo = 0.01, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  MatrixXd a(rows, cols);
  for (Index j = 0; j < rows; ++j)
    for (Index k = 0; k < cols; ++k) a(j, k) = u(gen);
  return a;
}

inline MatrixXd random_normal(Index rows, Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  MatrixXd a(rows, cols);
  for (Index j = 0; j < rows; ++j)
    for (Index k = 0; k < cols; ++k) a(j, k) = nd(gen);
  return a;
}

inline VectorXd random_simplex(Index m, std::mt19937_64& gen) {
  std::exponential_distribution<double> e(1.0);
  VectorXd x(m);
  for (Index k = 0; k < m; ++k) x[k] = e(gen);
  return x / x.sum();
}

// Plain-loop objective -(1/n) sum log((L x)_j + delta) + sum x.
inline double naive_objective(const MatrixXd& l, const VectorXd& x, double delta = 0.0) {
  double acc = 0.0;
  for (Index j = 0; j < l.rows(); ++j) {
    double row = delta;
    for (Index k = 0; k < l.cols(); ++k) row += l(j, k) * x[k];
    acc += std::log(row);
  }
  return -acc / static_cast<double>(l.rows()) + x.sum();
}

// Central differences of naive_objective.
inline VectorXd fd_gradient(const MatrixXd& l, const VectorXd& x, double h = 1e-6) {
  VectorXd g(x.size());
  for (Index k = 0; k < x.size(); ++k) {
    VectorXd up = x, down = x;
    up[k] += h;
    down[k] -= h;
    g[k] = (naive_objective(l, up) - naive_objective(l, down)) / (2.0 * h);
  }
  return g;
}

// Exhaustive search over support sets of min 1/2 y'Hy + a'y, y >= 0 (H
// positive definite). Every candidate solves the unconstrained problem on
// its support; the best feasible one is the optimum.
inline VectorXd qp_enumerate(const MatrixXd& h, const VectorXd& a) {
  const Index m = a.size();
  VectorXd best = VectorXd::Zero(m);
  double best_value = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<Index> s;
    for (Index i = 0; i < m; ++i)
      if (mask & (1u << i)) s.push_back(i);
    const Index k = static_cast<Index>(s.size());
    MatrixXd hs(k, k);
    VectorXd as(k);
    for (Index i = 0; i < k; ++i) {
      as[i] = a[s[i]];
      for (Index j = 0; j < k; ++j) hs(i, j) = h(s[i], s[j]);
    }
    const VectorXd ys = hs.fullPivLu().solve(-as);
    if ((ys.array() < 0.0).any()) continue;
    VectorXd y = VectorXd::Zero(m);
    for (Index i = 0; i < k; ++i) y[s[i]] = ys[i];
    const double value = 0.5 * y.dot(h * y) + a.dot(y);
    if (value < best_value) {
      best_value = value;
      best = y;
    }
  }
  return best;
}

// Projection onto the simplex by bisection on the threshold tau of
// y = max(v - tau, 0); independent of the sort-based algorithm.
inline VectorXd project_simplex_bisect(const VectorXd& v) {
  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = (v.array() - mid).cwiseMax(0.0).sum();
    (s > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).cwiseMax(0.0).matrix();
}

// Grid search of -(1/n) sum log (L x)_j over the 2-simplex with spacing
// `step`.
inline double grid_search_simplex3(const MatrixXd& l, double step) {
  const int steps = static_cast<int>(std::lround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  VectorXd x(3);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      x << i * step, j * step, (steps - i - j) * step;
      double acc = 0.0;
      for (Index r = 0; r < l.rows(); ++r) acc += std::log(l.row(r).dot(x));
      best = std::min(best, -acc / static_cast<double>(l.rows()));
    }
  }
  return best;
}

}  // namespace testing
