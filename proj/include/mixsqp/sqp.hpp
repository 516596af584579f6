#pragma once

// mix-SQP: sequential quadratic programming for mixture proportions,
// optionally working through a truncated QR factor of L.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "mixsqp/objective.hpp"
#include "mixsqp/problem.hpp"

namespace mixsqp {

enum class Status { converged, max_iter, line_search_failed };

std::string_view to_string(Status s);

enum class Phase { factorization, derivatives, subproblem, line_search };

struct PhaseTimes {
  double factorization = 0.0;
  double derivatives = 0.0;
  double subproblem = 0.0;
  double line_search = 0.0;
  double total = 0.0;
};

// One row per outer iteration. The terminal iteration of a converged run
// takes no step and reports alpha = 1, n_linesearch = 0; a failed line
// search reports alpha = 0.
struct TraceRecord {
  Index iter = 0;
  double objective = 0.0;      // f*(x) at the iterate
  double dual_residual = 0.0;
  Index nnz = 0;
  double alpha = 1.0;
  double wall_time = 0.0;      // seconds since the solver started
  Index n_linesearch = 0;
};

struct SolverResult {
  VectorXd x;                      // on the simplex
  double objective = 0.0;          // f(x) = -(1/n) sum log (L x)_j, dense L
  double pre_normalization_sum = 0.0;
  double dual_residual = 0.0;      // from the last gradient evaluated
  VectorXd gradient;               // last gradient evaluated, at the raw iterate
  Status status = Status::max_iter;
  Index iterations = 0;
  Index factor_rank = 0;           // 0 on the dense path
  std::vector<TraceRecord> trace;
  PhaseTimes times;
};

struct SqpConfig {
  double xi = 0.01;
  double rho = 0.5;
  double eps_dual = 1e-8;
  double eps_active_set = 1e-10;
  // Log guard; unset means 1e-8 with a low-rank backing, 0 for dense.
  std::optional<double> delta;
  Index max_iter = 1000;
  Index max_linesearch = 60;
  Index max_qp_iter = 0;           // 0 selects 100 * m
  double support_threshold = 0.0;
  double rtol_qr = 1e-10;
  std::optional<Index> fixed_rank;
  bool use_lowrank = true;
  bool record_trace = true;
  // Called with the elapsed seconds of every timed phase.
  std::function<void(Phase, double)> phase_hook;

  void validate() const;
};

struct LineSearchConfig {
  double xi = 0.01;
  double rho = 0.5;
  Index max_steps = 60;
  double initial_step = 1.0;
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double value = 0.0;   // f* at x + alpha p when ok
  Index steps = 0;      // backtracking reductions performed
};

// Backtracks alpha = initial_step * rho^j until
//   f*(x + alpha p) <= f*(x) + xi alpha g^T p.
// The change in f* is computed from L x and L p directly, which keeps the
// test meaningful when the decrease is near rounding level. Guarded-log
// failures count as rejections.
LineSearchResult line_search(const LikelihoodOperator& op, const VectorXd& x,
                             const VectorXd& p, const VectorXd& g, double f_x,
                             const LineSearchConfig& cfg);

// x / sum(x), with the residual of the sum folded into the largest entry.
// The sum is 1 up to an ulp or so; zero entries stay zero. Throws
// InvalidInput if sum(x) <= 0.
VectorXd normalize_solution(const VectorXd& x);

// Unpenalized objective -(1/n) sum_j log (L x)_j on the dense matrix.
// Returns +inf if some (L x)_j is zero.
double mixture_objective(const MatrixXd& l, const VectorXd& x);

// Rows of L without unit maximum are rescaled internally (on a copy).
SolverResult mixsqp(const LikelihoodMatrix& l, const SqpConfig& cfg = {},
                    const std::optional<VectorXd>& x0 = std::nullopt);

}  // namespace mixsqp
