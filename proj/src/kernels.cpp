#include "mixsqp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mixsqp::kernels {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr Index kGramChunk = 2048;
constexpr Index kGramBlock = 64;

Index chunk_count(Index n, Index chunk) { return (n + chunk - 1) / chunk; }

// Sums `parts` left to right. Ordered, so independent of how the parts were
// scheduled.
double ordered_sum(const std::vector<double>& parts) {
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

}  // namespace

VectorXd matvec(const MatrixXd& a, const VectorXd& x) {
  const Index n = a.rows();
  VectorXd y(n);
  const Index chunks = chunk_count(n, kRowChunk);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kRowChunk;
    const Index len = std::min(kRowChunk, n - begin);
    y.segment(begin, len).noalias() = a.middleRows(begin, len) * x;
  }
  return y;
}

VectorXd matvec_transpose(const MatrixXd& a, const VectorXd& d) {
  const Index n = a.rows();
  const Index m = a.cols();
  const Index chunks = chunk_count(n, kRowChunk);
  if (chunks == 0) return VectorXd::Zero(m);
  MatrixXd partial(m, chunks);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kRowChunk;
    const Index len = std::min(kRowChunk, n - begin);
    partial.col(c).noalias() =
        a.middleRows(begin, len).transpose() * d.segment(begin, len);
  }
  VectorXd out = partial.col(0);
  for (Index c = 1; c < chunks; ++c) out += partial.col(c);
  return out;
}

MatrixXd weighted_gram(const MatrixXd& a, const VectorXd& w) {
  const Index n = a.rows();
  const Index m = a.cols();
  MatrixXd h = MatrixXd::Zero(m, m);
  const Index blocks = chunk_count(m, kGramBlock);
  MatrixXd scaled;
  for (Index begin = 0; begin < n; begin += kGramChunk) {
    const Index len = std::min(kGramChunk, n - begin);
    scaled.noalias() = w.segment(begin, len).asDiagonal() * a.middleRows(begin, len);
    // Each block of the lower triangle is owned by exactly one iteration.
#pragma omp parallel for schedule(dynamic)
    for (Index b = 0; b < blocks; ++b) {
      const Index col = b * kGramBlock;
      const Index width = std::min(kGramBlock, m - col);
      h.block(col, col, m - col, width).noalias() +=
          scaled.rightCols(m - col).transpose() * scaled.middleCols(col, width);
    }
  }
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < j; ++i) h(i, j) = h(j, i);
  return h;
}

double sum_log(const VectorXd& u, double delta) {
  const Index n = u.size();
  const Index chunks = chunk_count(n, kRowChunk);
  std::vector<double> parts(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kRowChunk;
    const Index end = std::min(n, begin + kRowChunk);
    double acc = 0.0;
    for (Index j = begin; j < end; ++j) {
      const double t = u[j] + delta;
      acc += t > 0.0 ? std::log(t) : kNaN;
    }
    parts[static_cast<std::size_t>(c)] = acc;
  }
  return ordered_sum(parts);
}

double sum_log_ratio(const VectorXd& u, const VectorXd& v, double alpha,
                     double delta) {
  const Index n = u.size();
  const Index chunks = chunk_count(n, kRowChunk);
  std::vector<double> parts(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kRowChunk;
    const Index end = std::min(n, begin + kRowChunk);
    double acc = 0.0;
    for (Index j = begin; j < end; ++j) {
      const double base = u[j] + delta;
      const double moved = base + alpha * v[j];
      if (!(base > 0.0) || !(moved > 0.0)) {
        acc = kNaN;
        continue;
      }
      acc += std::log1p(alpha * v[j] / base);
    }
    parts[static_cast<std::size_t>(c)] = acc;
  }
  return ordered_sum(parts);
}

namespace serial {

VectorXd matvec(const MatrixXd& a, const VectorXd& x) {
  VectorXd y = VectorXd::Zero(a.rows());
  for (Index j = 0; j < a.rows(); ++j) {
    double acc = 0.0;
    for (Index k = 0; k < a.cols(); ++k) acc += a(j, k) * x[k];
    y[j] = acc;
  }
  return y;
}

VectorXd matvec_transpose(const MatrixXd& a, const VectorXd& d) {
  VectorXd out = VectorXd::Zero(a.cols());
  for (Index k = 0; k < a.cols(); ++k) {
    double acc = 0.0;
    for (Index j = 0; j < a.rows(); ++j) acc += a(j, k) * d[j];
    out[k] = acc;
  }
  return out;
}

MatrixXd weighted_gram(const MatrixXd& a, const VectorXd& w) {
  const Index m = a.cols();
  MatrixXd h = MatrixXd::Zero(m, m);
  for (Index k = 0; k < m; ++k) {
    for (Index l = 0; l <= k; ++l) {
      double acc = 0.0;
      for (Index j = 0; j < a.rows(); ++j) acc += a(j, k) * w[j] * w[j] * a(j, l);
      h(k, l) = acc;
      h(l, k) = acc;
    }
  }
  return h;
}

double sum_log(const VectorXd& u, double delta) {
  double acc = 0.0;
  for (Index j = 0; j < u.size(); ++j) {
    const double t = u[j] + delta;
    if (!(t > 0.0)) return kNaN;
    acc += std::log(t);
  }
  return acc;
}

}  // namespace serial

}  // namespace mixsqp::kernels
