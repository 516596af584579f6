#pragma once

// First-order reference solvers: EM and projected gradient descent.

#include <Eigen/Dense>
#include <optional>

#include "mixsqp/problem.hpp"
#include "mixsqp/sqp.hpp"

namespace mixsqp {

struct FirstOrderConfig {
  Index max_iter = 10000;
  // Stop once |f(x_{t+1}) - f(x_t)| <= tol.
  double tol = 1e-10;
  // Projected gradient: first trial step of each backtracking search.
  double initial_step = 1.0;
  double xi = 0.01;
  double rho = 0.5;
  Index max_linesearch = 60;
  bool record_trace = true;

  void validate() const;
};

// x'_k = x_k (1/n) sum_j L_jk / (L x)_j, renormalized onto the simplex.
VectorXd em_step(const MatrixXd& l, const VectorXd& x);

SolverResult mixem(const LikelihoodMatrix& l, const FirstOrderConfig& cfg = {},
                   const std::optional<VectorXd>& x0 = std::nullopt);

// Euclidean projection onto {x : sum x = 1, x >= 0} by sorting.
VectorXd project_simplex(const VectorXd& v);

SolverResult mixpgd(const LikelihoodMatrix& l, const FirstOrderConfig& cfg = {},
                    const std::optional<VectorXd>& x0 = std::nullopt);

}  // namespace mixsqp
