#include "mixsqp/qp_activeset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixsqp/error.hpp"

namespace mixsqp {

namespace {

constexpr double kMinShift = 1e-12;
constexpr double kShiftGrowth = 100.0;
constexpr int kMaxShiftAttempts = 8;

std::vector<Index> free_indices(const std::vector<bool>& working) {
  std::vector<Index> free;
  for (std::size_t i = 0; i < working.size(); ++i)
    if (!working[i]) free.push_back(static_cast<Index>(i));
  return free;
}

}  // namespace

VectorXd eq_constrained_step(const MatrixXd& h, const VectorXd& b,
                             const std::vector<bool>& working, double ridge) {
  const Index m = b.size();
  VectorXd q = VectorXd::Zero(m);
  const std::vector<Index> free = free_indices(working);
  const Index k = static_cast<Index>(free.size());
  if (k == 0) return q;
  MatrixXd block(k, k);
  VectorXd rhs(k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) block(i, j) = h(free[i], free[j]);
    rhs[i] = -b[free[i]];
  }
  const VectorXd diag = block.diagonal();
  // A singular block (more free coordinates than the rank of H) can lose
  // definiteness to rounding; the shift then grows until the factorization
  // succeeds.
  Eigen::LLT<MatrixXd> chol;
  double shift = ridge;
  for (int attempt = 0;; ++attempt) {
    block.diagonal() = diag * (1.0 + shift);
    chol.compute(block);
    if (chol.info() == Eigen::Success) break;
    if (attempt == kMaxShiftAttempts)
      throw NumericalError("active set: free block of size " + std::to_string(k) +
                           " is not positive definite");
    shift = std::max(shift, kMinShift) * kShiftGrowth;
  }
  const VectorXd sol = chol.solve(rhs);
  if (!sol.allFinite()) throw NumericalError("active set: non-finite step");
  for (Index i = 0; i < k; ++i) q[free[i]] = sol[i];
  return q;
}

BlockingStep blocking_step(const VectorXd& y, const VectorXd& q,
                           const std::vector<bool>& working) {
  BlockingStep step;
  for (Index i = 0; i < y.size(); ++i) {
    if (working[static_cast<std::size_t>(i)] || !(q[i] < 0.0)) continue;
    const double ratio = -y[i] / q[i];
    if (ratio < step.alpha) {
      step.alpha = ratio;
      step.blocker = i;
    }
  }
  return step;
}

QpResult solve_qp(const QpSubproblem& sub, const QpOptions& opts) {
  const Index m = sub.lin.size();
  if (sub.hessian.rows() != m || sub.hessian.cols() != m ||
      static_cast<Index>(sub.working.size()) != m)
    throw InvalidInput("solve_qp: dimension mismatch");
  if (!(sub.ridge >= 0.0) || !(opts.eps >= 0.0))
    throw InvalidInput("solve_qp: ridge and eps must be non-negative");
  const Index free_count = static_cast<Index>(free_indices(sub.working).size());
  if (free_count == 0) throw InvalidInput("solve_qp: working set leaves nothing free");

  QpResult res;
  res.working = sub.working;
  res.y = VectorXd::Zero(m);
  for (Index i = 0; i < m; ++i)
    if (!res.working[static_cast<std::size_t>(i)]) res.y[i] = 1.0 / static_cast<double>(free_count);

  if (opts.on_iterate) opts.on_iterate(res.y);
  const Index max_iter = opts.max_iter > 0 ? opts.max_iter : 100 * m;
  for (Index it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    const VectorXd b = sub.hessian * res.y + sub.lin;
    const VectorXd q = eq_constrained_step(sub.hessian, b, res.working, sub.ridge);
    if (q.lpNorm<Eigen::Infinity>() <= opts.eps) {
      // Multipliers of the bound constraints are b_i on the working set.
      Index drop = -1;
      double most_negative = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (res.working[static_cast<std::size_t>(i)] && b[i] < most_negative) {
          most_negative = b[i];
          drop = i;
        }
      }
      if (drop < 0 || most_negative >= -opts.eps) {
        res.converged = true;
        return res;
      }
      res.working[static_cast<std::size_t>(drop)] = false;
      continue;
    }
    const BlockingStep step = blocking_step(res.y, q, res.working);
    res.y += step.alpha * q;
    if (step.blocker) {
      res.working[static_cast<std::size_t>(*step.blocker)] = true;
      res.y[*step.blocker] = 0.0;
    }
    for (Index i = 0; i < m; ++i) res.y[i] = std::max(res.y[i], 0.0);
    if (opts.on_iterate) opts.on_iterate(res.y);
  }
  return res;
}

}  // namespace mixsqp
