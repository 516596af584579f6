#include "mixsqp/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsqp/error.hpp"
#include "mixsqp/kernels.hpp"
#include "mixsqp/lowrank.hpp"
#include "mixsqp/qp_activeset.hpp"
#include "mixsqp/stopwatch.hpp"

namespace mixsqp {

namespace {

// Relative diagonal shift for free blocks of the subproblem Hessian.
constexpr double kRidge = 1e-10;

Index support_size(const VectorXd& x, double threshold) {
  Index nnz = 0;
  for (Index k = 0; k < x.size(); ++k) nnz += x[k] > threshold ? 1 : 0;
  return nnz;
}

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::max_iter: return "max_iter";
    case Status::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

void SqpConfig::validate() const {
  if (!(xi > 0.0 && xi < 1.0)) throw InvalidInput("xi must lie in (0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("rho must lie in (0, 1)");
  if (!(eps_dual >= 0.0)) throw InvalidInput("eps_dual must be non-negative");
  if (!(eps_active_set >= 0.0)) throw InvalidInput("eps_active_set must be non-negative");
  if (delta && !(*delta >= 0.0)) throw InvalidInput("delta must be non-negative");
  if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
  if (max_linesearch < 0) throw InvalidInput("max_linesearch must be non-negative");
  if (!(support_threshold >= 0.0)) throw InvalidInput("support_threshold must be non-negative");
  if (use_lowrank && !fixed_rank && !(rtol_qr > 0.0 && rtol_qr < 1.0))
    throw InvalidInput("rtol_qr must lie in (0, 1)");
  if (fixed_rank && *fixed_rank < 1) throw InvalidInput("fixed rank must be at least 1");
}

LineSearchResult line_search(const LikelihoodOperator& op, const VectorXd& x,
                             const VectorXd& p, const VectorXd& g, double f_x,
                             const LineSearchConfig& cfg) {
  const VectorXd u = op.apply(x);
  const VectorXd v = op.apply(p);
  const double slope = g.dot(p);
  const double step_sum = p.sum();
  const double inv_n = 1.0 / static_cast<double>(op.rows());
  LineSearchResult res;
  double alpha = cfg.initial_step;
  for (Index j = 0; j <= cfg.max_steps; ++j) {
    const double ratio = kernels::sum_log_ratio(u, v, alpha, op.delta());
    if (!std::isnan(ratio)) {
      const double change = -inv_n * ratio + alpha * step_sum;
      if (change <= cfg.xi * alpha * slope) {
        res.ok = true;
        res.alpha = alpha;
        res.value = f_x + change;
        res.steps = j;
        return res;
      }
    }
    alpha *= cfg.rho;
  }
  res.steps = cfg.max_steps;
  return res;
}

VectorXd normalize_solution(const VectorXd& x) {
  const double total = x.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw InvalidInput("normalize_solution: entries must have a positive finite sum");
  VectorXd out = x / total;
  Index top = 0;
  out.maxCoeff(&top);
  for (int pass = 0; pass < 4; ++pass) {
    const double sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (sum == 1.0) break;
    out[top] += 1.0 - sum;
  }
  return out;
}

double mixture_objective(const MatrixXd& l, const VectorXd& x) {
  const VectorXd u = kernels::matvec(l, x);
  const double logs = kernels::sum_log(u, 0.0);
  if (std::isnan(logs)) return std::numeric_limits<double>::infinity();
  return -logs / static_cast<double>(l.rows());
}

SolverResult mixsqp(const LikelihoodMatrix& l, const SqpConfig& cfg,
                    const std::optional<VectorXd>& x0) {
  cfg.validate();
  const Stopwatch clock;
  const Index m = l.cols();
  VectorXd x = VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  if (x0) {
    if (x0->size() != m) throw InvalidInput("mixsqp: x0 has the wrong length");
    if ((x0->array() < 0.0).any() || !x0->allFinite())
      throw InvalidInput("mixsqp: x0 must be non-negative and finite");
    if (std::abs(x0->sum() - 1.0) > 1e-8) throw InvalidInput("mixsqp: x0 must sum to 1");
    x = *x0;
  }

  SolverResult res;
  auto timed = [&](Phase phase, double& slot, auto&& fn) {
    const Stopwatch sw;
    auto out = fn();
    const double secs = sw.seconds();
    slot += secs;
    if (cfg.phase_hook) cfg.phase_hook(phase, secs);
    return out;
  };

  // The solution does not depend on per-row scale; iterating on rows with
  // unit maximum makes the computation itself scale-free.
  std::optional<LikelihoodMatrix> rescaled;
  if (!l.rows_have_unit_max()) rescaled = LikelihoodMatrix::row_normalized(l.values());
  const MatrixXd& work = rescaled ? rescaled->values() : l.values();

  std::optional<LowRankFactor> factor;
  if (cfg.use_lowrank) {
    factor = timed(Phase::factorization, res.times.factorization, [&] {
      RrqrOptions opts;
      opts.rtol = cfg.rtol_qr;
      opts.fixed_rank = cfg.fixed_rank;
      return rrqr(work, opts);
    });
    res.factor_rank = factor->rank;
  }
  const LikelihoodOperator op =
      factor ? LikelihoodOperator::lowrank(*factor, cfg.delta.value_or(1e-8))
             : LikelihoodOperator::dense(work, cfg.delta.value_or(0.0));

  const LineSearchConfig ls_cfg{cfg.xi, cfg.rho, cfg.max_linesearch, 1.0};
  QpOptions qp_opts;
  qp_opts.eps = cfg.eps_active_set;
  qp_opts.max_iter = cfg.max_qp_iter;

  res.status = Status::max_iter;
  for (Index t = 0; t < cfg.max_iter; ++t) {
    res.iterations = t + 1;
    DerivativeBundle bundle = timed(Phase::derivatives, res.times.derivatives,
                                    [&] { return eval_derivatives(op, x); });
    if (!std::isfinite(bundle.value) || !bundle.gradient.allFinite() ||
        !bundle.hessian.allFinite())
      throw NumericalError("mixsqp: non-finite objective or derivatives at iteration " +
                           std::to_string(t));
    res.gradient = bundle.gradient;
    res.dual_residual = dual_residual(bundle.gradient);

    QpSubproblem sub;
    sub.working.resize(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k)
      sub.working[static_cast<std::size_t>(k)] = x[k] <= cfg.support_threshold;
    sub.lin = bundle.gradient - bundle.hessian * x;
    sub.ridge = kRidge;
    sub.hessian = std::move(bundle.hessian);
    const QpResult qp = timed(Phase::subproblem, res.times.subproblem,
                              [&] { return solve_qp(sub, qp_opts); });
    const VectorXd p = qp.y - x;

    TraceRecord rec;
    rec.iter = t;
    rec.objective = bundle.value;
    rec.dual_residual = res.dual_residual;
    rec.nnz = support_size(x, cfg.support_threshold);

    if (res.dual_residual <= cfg.eps_dual) {
      res.status = Status::converged;
      rec.wall_time = clock.seconds();
      if (cfg.record_trace) res.trace.push_back(rec);
      break;
    }

    const LineSearchResult ls = timed(Phase::line_search, res.times.line_search, [&] {
      return line_search(op, x, p, bundle.gradient, bundle.value, ls_cfg);
    });
    rec.n_linesearch = ls.steps;
    if (!ls.ok) {
      res.status = Status::line_search_failed;
      rec.alpha = 0.0;
      rec.wall_time = clock.seconds();
      if (cfg.record_trace) res.trace.push_back(rec);
      break;
    }
    x = (x + ls.alpha * p).cwiseMax(0.0);
    rec.alpha = ls.alpha;
    rec.wall_time = clock.seconds();
    if (cfg.record_trace) res.trace.push_back(rec);
  }

  res.pre_normalization_sum = x.sum();
  res.x = normalize_solution(x);
  res.objective = mixture_objective(l.values(), res.x);
  res.times.total = clock.seconds();
  return res;
}

}  // namespace mixsqp
