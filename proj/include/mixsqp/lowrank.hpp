#pragma once

// Truncated column-pivoted Householder QR: L P ~= Q R, used as a matrix-free
// stand-in for L. Nothing here ever forms Q R P^T except reconstruct(),
// which exists for tests and diagnostics.

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace mixsqp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LowRankFactor {
  MatrixXd q;                // n x rank, orthonormal columns
  MatrixXd r;                // rank x m, upper trapezoidal
  std::vector<Index> perm;   // column k of L P is column perm[k] of L
  Index rank = 0;
  double rtol = 0.0;

  Index rows() const { return q.rows(); }
  Index cols() const { return r.cols(); }
};

struct RrqrOptions {
  // Stop at the first k with |R_kk| <= rtol * |R_00|.
  double rtol = 1e-10;
  // Force exactly this rank (capped at min(n, m)); rtol is then ignored.
  std::optional<Index> fixed_rank;
};

LowRankFactor rrqr(const MatrixXd& l, const RrqrOptions& opts = {});

// L~ x = Q (R (P^T x))
VectorXd apply(const LowRankFactor& f, const VectorXd& x);

// L~^T d = P (R^T (Q^T d))
VectorXd apply_transpose(const LowRankFactor& f, const VectorXd& d);

// L~^T diag(d)^2 L~ = P R^T (Q^T diag(d)^2 Q) R P^T, forming only the
// rank x rank core from n-length data.
MatrixXd gram_weighted(const LowRankFactor& f, const VectorXd& d);

// Q R P^T as a dense matrix.
MatrixXd reconstruct(const LowRankFactor& f);

}  // namespace mixsqp
