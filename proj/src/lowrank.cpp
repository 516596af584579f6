#include "mixsqp/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsqp/error.hpp"
#include "mixsqp/kernels.hpp"

namespace mixsqp {

namespace {

// Running column norms lose accuracy through cancellation; once a norm has
// dropped below this fraction of its last exact value it is recomputed.
constexpr double kNormRecompute = 1e-4;

// Applies (I - tau v v^T) to y, where v = [head; tail] and y has the same
// length as v.
template <typename Col, typename Tail>
void reflect(double head, const Tail& tail, double tau, Col y) {
  const double w = head * y[0] + tail.dot(y.tail(y.size() - 1));
  y[0] -= tau * w * head;
  y.tail(y.size() - 1) -= (tau * w) * tail;
}

}  // namespace

LowRankFactor rrqr(const MatrixXd& l, const RrqrOptions& opts) {
  const Index n = l.rows();
  const Index m = l.cols();
  if (n < 1 || m < 1) throw InvalidInput("rrqr: empty matrix");
  if (!opts.fixed_rank && !(opts.rtol > 0.0 && opts.rtol < 1.0))
    throw InvalidInput("rrqr: rtol must lie in (0, 1)");
  if (opts.fixed_rank && *opts.fixed_rank < 1)
    throw InvalidInput("rrqr: fixed rank must be at least 1");

  const Index max_rank = std::min(n, m);
  const Index target = opts.fixed_rank ? std::min(*opts.fixed_rank, max_rank) : max_rank;

  MatrixXd a = l;
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  VectorXd norms2 = a.colwise().squaredNorm().transpose();
  VectorXd exact2 = norms2;
  std::vector<double> heads;
  std::vector<double> taus;
  double leading = 0.0;
  Index rank = 0;

  for (Index k = 0; k < target; ++k) {
    Index pivot = k;
    for (Index c = k + 1; c < m; ++c)
      if (norms2[c] > norms2[pivot]) pivot = c;
    if (pivot != k) {
      a.col(k).swap(a.col(pivot));
      std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pivot)]);
      std::swap(norms2[k], norms2[pivot]);
      std::swap(exact2[k], exact2[pivot]);
    }
    const double nrm = a.col(k).tail(n - k).norm();
    if (k == 0) leading = nrm;
    if (nrm == 0.0) break;
    if (!opts.fixed_rank && nrm <= opts.rtol * leading) break;

    const double x0 = a(k, k);
    const double alpha = x0 >= 0.0 ? -nrm : nrm;
    const double head = x0 - alpha;
    const double tau = 1.0 / (nrm * (nrm + std::abs(x0)));
    a(k, k) = alpha;
    heads.push_back(head);
    taus.push_back(tau);
    const auto tail = a.col(k).tail(n - k - 1);

#pragma omp parallel for schedule(static)
    for (Index c = k + 1; c < m; ++c) {
      reflect(head, tail, tau, a.col(c).tail(n - k));
      norms2[c] -= a(k, c) * a(k, c);
      if (norms2[c] <= kNormRecompute * exact2[c]) {
        norms2[c] = a.col(c).tail(n - k - 1).squaredNorm();
        exact2[c] = norms2[c];
      }
    }
    rank = k + 1;
  }
  if (rank == 0) throw InvalidInput("rrqr: matrix is zero");

  LowRankFactor f;
  f.rank = rank;
  f.rtol = opts.fixed_rank ? 0.0 : opts.rtol;
  f.perm = std::move(perm);
  f.r = MatrixXd::Zero(rank, m);
  for (Index i = 0; i < rank; ++i) f.r.row(i).tail(m - i) = a.row(i).tail(m - i);

  // Q = H_0 ... H_{rank-1} [I; 0], accumulated backwards.
  f.q = MatrixXd::Zero(n, rank);
  for (Index i = 0; i < rank; ++i) f.q(i, i) = 1.0;
  for (Index k = rank - 1; k >= 0; --k) {
    const auto tail = a.col(k).tail(n - k - 1);
    const double head = heads[static_cast<std::size_t>(k)];
    const double tau = taus[static_cast<std::size_t>(k)];
#pragma omp parallel for schedule(static)
    for (Index c = k; c < rank; ++c) reflect(head, tail, tau, f.q.col(c).tail(n - k));
  }
  return f;
}

VectorXd apply(const LowRankFactor& f, const VectorXd& x) {
  if (x.size() != f.cols()) throw InvalidInput("apply: dimension mismatch");
  VectorXd permuted(f.cols());
  for (Index k = 0; k < f.cols(); ++k) permuted[k] = x[f.perm[static_cast<std::size_t>(k)]];
  return kernels::matvec(f.q, f.r * permuted);
}

VectorXd apply_transpose(const LowRankFactor& f, const VectorXd& d) {
  if (d.size() != f.rows()) throw InvalidInput("apply_transpose: dimension mismatch");
  const VectorXd core = kernels::matvec_transpose(f.q, d);
  const VectorXd expanded = f.r.transpose() * core;
  VectorXd out(f.cols());
  for (Index k = 0; k < f.cols(); ++k) out[f.perm[static_cast<std::size_t>(k)]] = expanded[k];
  return out;
}

MatrixXd gram_weighted(const LowRankFactor& f, const VectorXd& d) {
  if (d.size() != f.rows()) throw InvalidInput("gram_weighted: dimension mismatch");
  const MatrixXd core = kernels::weighted_gram(f.q, d);
  const MatrixXd right = core * f.r;
  MatrixXd g = f.r.transpose() * right;
  g = 0.5 * (g + g.transpose()).eval();
  const Index m = f.cols();
  MatrixXd out(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i)
      out(f.perm[static_cast<std::size_t>(i)], f.perm[static_cast<std::size_t>(j)]) = g(i, j);
  return out;
}

MatrixXd reconstruct(const LowRankFactor& f) {
  const MatrixXd qr = f.q * f.r;
  MatrixXd out(f.rows(), f.cols());
  for (Index k = 0; k < f.cols(); ++k) out.col(f.perm[static_cast<std::size_t>(k)]) = qr.col(k);
  return out;
}

}  // namespace mixsqp
