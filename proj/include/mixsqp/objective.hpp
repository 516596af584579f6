#pragma once

// f*(x) = -(1/n) sum_j log((L x)_j + delta) + sum_k x_k and its derivatives,
// evaluated against a dense L or a truncated QR factor of L.

#include <Eigen/Dense>
#include <variant>

#include "mixsqp/lowrank.hpp"

namespace mixsqp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Non-owning view of the likelihood data; the backing matrix or factor
// must outlive the operator.
class LikelihoodOperator {
 public:
  static LikelihoodOperator dense(const MatrixXd& l, double delta = 0.0);
  static LikelihoodOperator lowrank(const LowRankFactor& f, double delta = 1e-8);

  Index rows() const;
  Index cols() const;
  double delta() const { return delta_; }
  bool is_lowrank() const { return std::holds_alternative<const LowRankFactor*>(backing_); }

  VectorXd apply(const VectorXd& x) const;
  VectorXd apply_transpose(const VectorXd& d) const;
  // L^T diag(d)^2 L (no 1/n factor).
  MatrixXd gram_weighted(const VectorXd& d) const;

 private:
  LikelihoodOperator(std::variant<const MatrixXd*, const LowRankFactor*> backing, double delta);

  std::variant<const MatrixXd*, const LowRankFactor*> backing_;
  double delta_;
};

struct DerivativeBundle {
  double value = 0.0;
  VectorXd gradient;  // -(1/n) L^T d + 1
  MatrixXd hessian;   // (1/n) L^T diag(d)^2 L
  VectorXd d;         // 1 / ((L x)_j + delta)
};

// Throws InfeasibleEvaluation when some (L x)_j + delta <= 0.
double eval_objective(const LikelihoodOperator& op, const VectorXd& x);

// Same as eval_objective, reusing an already computed u = L x.
double objective_from_fitted(const LikelihoodOperator& op, const VectorXd& u,
                             const VectorXd& x);

DerivativeBundle eval_derivatives(const LikelihoodOperator& op, const VectorXd& x);

// max(0, -min_k g_k)
double dual_residual(const VectorXd& g);

}  // namespace mixsqp
