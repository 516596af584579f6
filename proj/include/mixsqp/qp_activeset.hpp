#pragma once

// Primal active-set method for
//
//   minimize 1/2 y^T H y + a^T y   subject to  y >= 0,
//
// the quadratic subproblem solved once per SQP iteration.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace mixsqp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct QpSubproblem {
  MatrixXd hessian;
  VectorXd lin;
  // working[i] == true means y_i is held at zero. At least one coordinate
  // must be free.
  std::vector<bool> working;
  // Relative diagonal shift: each free diagonal entry H_ii becomes
  // (1 + ridge) H_ii before factorizing.
  double ridge = 0.0;
};

struct QpResult {
  VectorXd y;
  std::vector<bool> working;
  Index iterations = 0;
  bool converged = false;
};

struct QpOptions {
  double eps = 1e-10;
  // 0 selects 100 * m.
  Index max_iter = 0;
  // Called with y after the start point and after every step.
  std::function<void(const VectorXd&)> on_iterate;
};

// Starts from y_i = 0 on the working set and 1/k on the k free
// coordinates. Throws NumericalError if a free block cannot be factorized.
QpResult solve_qp(const QpSubproblem& sub, const QpOptions& opts = {});

// Solves min 1/2 q^T H q + b^T q subject to q_i = 0 on the working set,
// i.e. (H_FF + ridge diag(H_FF)) q_F = -b_F. If the shifted block is not
// numerically positive definite the shift is raised by factors of 100 (up
// to 8 times) before giving up with NumericalError. Returns zeros if nothing
// is free.
VectorXd eq_constrained_step(const MatrixXd& h, const VectorXd& b,
                             const std::vector<bool>& working, double ridge);

struct BlockingStep {
  double alpha = 1.0;
  std::optional<Index> blocker;
};

// Largest alpha in [0, 1] keeping y + alpha q >= 0 over free coordinates;
// ties go to the smallest index.
BlockingStep blocking_step(const VectorXd& y, const VectorXd& q,
                           const std::vector<bool>& working);

}  // namespace mixsqp
