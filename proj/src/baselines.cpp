#include "mixsqp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mixsqp/error.hpp"
#include "mixsqp/kernels.hpp"
#include "mixsqp/stopwatch.hpp"

namespace mixsqp {

namespace {

// A projected-gradient direction this small means x is a fixed point of the
// projection map.
constexpr double kStationaryStep = 1e-14;

VectorXd initial_point(Index m, const std::optional<VectorXd>& x0) {
  if (!x0) return VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  if (x0->size() != m) throw InvalidInput("x0 has the wrong length");
  if ((x0->array() < 0.0).any() || !x0->allFinite() || std::abs(x0->sum() - 1.0) > 1e-8)
    throw InvalidInput("x0 must lie on the simplex");
  return *x0;
}

VectorXd fitted(const MatrixXd& l, const VectorXd& x) {
  VectorXd u = kernels::matvec(l, x);
  for (Index j = 0; j < u.size(); ++j)
    if (!(u[j] > 0.0))
      throw InvalidInput("zero likelihood denominator in row " + std::to_string(j));
  return u;
}

double mean_neg_log(const VectorXd& u) {
  return -kernels::sum_log(u, 0.0) / static_cast<double>(u.size());
}

Index support_size(const VectorXd& x) {
  return static_cast<Index>((x.array() > 0.0).count());
}

void finish(SolverResult& res, const MatrixXd& l, const VectorXd& x, const Stopwatch& clock) {
  res.pre_normalization_sum = x.sum();
  res.x = normalize_solution(x);
  res.objective = mixture_objective(l, res.x);
  res.times.total = clock.seconds();
}

}  // namespace

void FirstOrderConfig::validate() const {
  if (max_iter < 1) throw InvalidInput("max_iter must be at least 1");
  if (!(tol >= 0.0)) throw InvalidInput("tol must be non-negative");
  if (!(initial_step > 0.0 && initial_step <= 1.0))
    throw InvalidInput("initial_step must lie in (0, 1]");
  if (!(xi > 0.0 && xi < 1.0) || !(rho > 0.0 && rho < 1.0))
    throw InvalidInput("xi and rho must lie in (0, 1)");
}

VectorXd em_step(const MatrixXd& l, const VectorXd& x) {
  const VectorXd u = fitted(l, x);
  const VectorXd w = kernels::matvec_transpose(l, u.cwiseInverse());
  VectorXd next = x.cwiseProduct(w) / static_cast<double>(l.rows());
  return next / next.sum();
}

SolverResult mixem(const LikelihoodMatrix& lm, const FirstOrderConfig& cfg,
                   const std::optional<VectorXd>& x0) {
  cfg.validate();
  const Stopwatch clock;
  const MatrixXd& l = lm.values();
  const double inv_n = 1.0 / static_cast<double>(l.rows());
  VectorXd x = initial_point(l.cols(), x0);
  VectorXd u = fitted(l, x);
  double f = mean_neg_log(u);

  SolverResult res;
  res.status = Status::max_iter;
  for (Index t = 0; t < cfg.max_iter; ++t) {
    res.iterations = t + 1;
    const Stopwatch phase;
    // Responsibilities phi_jk = L_jk x_k / u_j are folded into one
    // transpose product; the M-step averages them over j.
    const VectorXd w = inv_n * kernels::matvec_transpose(l, u.cwiseInverse());
    res.gradient = 1.0 - w.array();
    res.dual_residual = dual_residual(res.gradient);
    TraceRecord rec;
    rec.iter = t;
    rec.objective = f + x.sum();
    rec.dual_residual = res.dual_residual;
    rec.nnz = support_size(x);

    VectorXd next = x.cwiseProduct(w);
    next /= next.sum();
    const VectorXd u_next = fitted(l, next);
    const double f_next = mean_neg_log(u_next);
    res.times.derivatives += phase.seconds();

    rec.wall_time = clock.seconds();
    if (cfg.record_trace) res.trace.push_back(rec);
    const double change = std::abs(f_next - f);
    x = next;
    u = u_next;
    f = f_next;
    if (change <= cfg.tol) {
      res.status = Status::converged;
      break;
    }
  }
  finish(res, l, x, clock);
  return res;
}

VectorXd project_simplex(const VectorXd& v) {
  const Index m = v.size();
  if (m == 0) return v;
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Index j = 0; j < m; ++j) {
    cumsum += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

SolverResult mixpgd(const LikelihoodMatrix& lm, const FirstOrderConfig& cfg,
                    const std::optional<VectorXd>& x0) {
  cfg.validate();
  const Stopwatch clock;
  const MatrixXd& l = lm.values();
  const LikelihoodOperator op = LikelihoodOperator::dense(l);
  const LineSearchConfig ls_cfg{cfg.xi, cfg.rho, cfg.max_linesearch, cfg.initial_step};
  const double inv_n = 1.0 / static_cast<double>(l.rows());
  VectorXd x = initial_point(l.cols(), x0);
  VectorXd u = fitted(l, x);
  double f = mean_neg_log(u);

  SolverResult res;
  res.status = Status::max_iter;
  for (Index t = 0; t < cfg.max_iter; ++t) {
    res.iterations = t + 1;
    const Stopwatch phase;
    res.gradient = 1.0 - (inv_n * kernels::matvec_transpose(l, u.cwiseInverse())).array();
    res.dual_residual = dual_residual(res.gradient);
    res.times.derivatives += phase.seconds();
    TraceRecord rec;
    rec.iter = t;
    rec.objective = f + x.sum();
    rec.dual_residual = res.dual_residual;
    rec.nnz = support_size(x);

    // Adding the constant 1 of the penalized gradient does not move the
    // projection.
    const VectorXd direction = project_simplex(x - res.gradient) - x;
    if (direction.lpNorm<Eigen::Infinity>() <= kStationaryStep) {
      res.status = Status::converged;
      rec.wall_time = clock.seconds();
      if (cfg.record_trace) res.trace.push_back(rec);
      break;
    }
    const Stopwatch ls_clock;
    const LineSearchResult ls =
        line_search(op, x, direction, res.gradient, f + x.sum(), ls_cfg);
    res.times.line_search += ls_clock.seconds();
    rec.n_linesearch = ls.steps;
    if (!ls.ok) {
      res.status = Status::line_search_failed;
      rec.alpha = 0.0;
      rec.wall_time = clock.seconds();
      if (cfg.record_trace) res.trace.push_back(rec);
      break;
    }
    x = (x + ls.alpha * direction).cwiseMax(0.0);
    x /= x.sum();
    u = fitted(l, x);
    const double f_next = mean_neg_log(u);
    rec.alpha = ls.alpha;
    rec.wall_time = clock.seconds();
    if (cfg.record_trace) res.trace.push_back(rec);
    const double change = std::abs(f_next - f);
    f = f_next;
    if (change <= cfg.tol) {
      res.status = Status::converged;
      break;
    }
  }
  finish(res, l, x, clock);
  return res;
}

}  // namespace mixsqp
