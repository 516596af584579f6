#include "mixsqp/objective.hpp"

#include <algorithm>
#include <cmath>

#include "mixsqp/error.hpp"
#include "mixsqp/kernels.hpp"

namespace mixsqp {

LikelihoodOperator::LikelihoodOperator(
    std::variant<const MatrixXd*, const LowRankFactor*> backing, double delta)
    : backing_(backing), delta_(delta) {}

LikelihoodOperator LikelihoodOperator::dense(const MatrixXd& l, double delta) {
  if (!(delta >= 0.0)) throw InvalidInput("delta must be non-negative");
  return LikelihoodOperator(&l, delta);
}

LikelihoodOperator LikelihoodOperator::lowrank(const LowRankFactor& f, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("delta must be positive for a low-rank backing");
  return LikelihoodOperator(&f, delta);
}

Index LikelihoodOperator::rows() const {
  return std::visit([](const auto* b) { return b->rows(); }, backing_);
}

Index LikelihoodOperator::cols() const {
  return std::visit([](const auto* b) { return b->cols(); }, backing_);
}

VectorXd LikelihoodOperator::apply(const VectorXd& x) const {
  if (const auto* l = std::get_if<const MatrixXd*>(&backing_)) {
    if (x.size() != (*l)->cols()) throw InvalidInput("apply: dimension mismatch");
    return kernels::matvec(**l, x);
  }
  return mixsqp::apply(*std::get<const LowRankFactor*>(backing_), x);
}

VectorXd LikelihoodOperator::apply_transpose(const VectorXd& d) const {
  if (const auto* l = std::get_if<const MatrixXd*>(&backing_)) {
    if (d.size() != (*l)->rows()) throw InvalidInput("apply_transpose: dimension mismatch");
    return kernels::matvec_transpose(**l, d);
  }
  return mixsqp::apply_transpose(*std::get<const LowRankFactor*>(backing_), d);
}

MatrixXd LikelihoodOperator::gram_weighted(const VectorXd& d) const {
  if (const auto* l = std::get_if<const MatrixXd*>(&backing_))
    return kernels::weighted_gram(**l, d);
  return mixsqp::gram_weighted(*std::get<const LowRankFactor*>(backing_), d);
}

double objective_from_fitted(const LikelihoodOperator& op, const VectorXd& u,
                             const VectorXd& x) {
  const double logs = kernels::sum_log(u, op.delta());
  if (std::isnan(logs))
    throw InfeasibleEvaluation("objective: a guarded log term is not positive");
  return -logs / static_cast<double>(u.size()) + x.sum();
}

double eval_objective(const LikelihoodOperator& op, const VectorXd& x) {
  return objective_from_fitted(op, op.apply(x), x);
}

DerivativeBundle eval_derivatives(const LikelihoodOperator& op, const VectorXd& x) {
  const VectorXd u = op.apply(x);
  DerivativeBundle out;
  out.value = objective_from_fitted(op, u, x);
  out.d = (u.array() + op.delta()).inverse().matrix();
  const double inv_n = 1.0 / static_cast<double>(op.rows());
  out.gradient = (-inv_n) * op.apply_transpose(out.d);
  out.gradient.array() += 1.0;
  out.hessian = inv_n * op.gram_weighted(out.d);
  return out;
}

double dual_residual(const VectorXd& g) {
  if (g.size() == 0) return 0.0;
  return std::max(0.0, -g.minCoeff());
}

}  // namespace mixsqp
