#pragma once

// Row-parallel dense kernels shared by the objective, low-rank and baseline
// modules.
//
// The parallel versions split rows into fixed chunks of kRowChunk and reduce
// partial results in chunk order, so the output is bit-identical for any
// thread count. The `serial` namespace holds plain-loop reference versions
// used by tests and by the benchmark.

#include <Eigen/Dense>

namespace mixsqp::kernels {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr Index kRowChunk = 4096;

// A * x
VectorXd matvec(const MatrixXd& a, const VectorXd& x);

// A^T * d
VectorXd matvec_transpose(const MatrixXd& a, const VectorXd& d);

// A^T diag(w)^2 A, symmetric.
MatrixXd weighted_gram(const MatrixXd& a, const VectorXd& w);

// sum_j log(u_j + delta), or NaN if any guarded term is <= 0.
double sum_log(const VectorXd& u, double delta);

// sum_j log1p(alpha * v_j / (u_j + delta)); the log-ratio between the
// guarded terms at two points. NaN if any new term is <= 0.
double sum_log_ratio(const VectorXd& u, const VectorXd& v, double alpha,
                     double delta);

namespace serial {

VectorXd matvec(const MatrixXd& a, const VectorXd& x);
VectorXd matvec_transpose(const MatrixXd& a, const VectorXd& d);
MatrixXd weighted_gram(const MatrixXd& a, const VectorXd& w);
double sum_log(const VectorXd& u, double delta);

}  // namespace serial

}  // namespace mixsqp::kernels
