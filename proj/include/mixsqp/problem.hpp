#pragma once

// Problem data: observations, the variance grid, and the row-scaled
// likelihood matrix L with L(j, k) = N(z_j; 0, sigma_k^2 + s_j^2).

#include <Eigen/Dense>
#include <vector>

namespace mixsqp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Effect estimates z and their standard errors s.
struct ObservationSet {
  std::vector<double> z;
  std::vector<double> s;

  std::size_t size() const { return z.size(); }
  // Throws InvalidInput on length mismatch, non-finite values or s <= 0.
  void validate() const;
};

// Standard deviations of the zero-mean normal mixture components.
struct VarianceGrid {
  std::vector<double> sigma;

  std::size_t size() const { return sigma.size(); }
  // Throws InvalidInput unless non-empty, sigma[0] >= 0 and strictly
  // increasing.
  void validate() const;
};

// Dense n x m non-negative likelihood matrix together with the factor that
// was divided out of each row. Matrices produced by
// build_likelihood_matrix() have every row maximum equal to 1; matrices
// wrapped from caller data keep whatever row scale they arrive with.
class LikelihoodMatrix {
 public:
  // Wraps `values` (row_scale defaults to ones). Throws InvalidInput if
  // validate() would fail.
  explicit LikelihoodMatrix(MatrixXd values);
  LikelihoodMatrix(MatrixXd values, VectorXd row_scale);

  // Divides every row by its maximum, recording the maxima in row_scale.
  static LikelihoodMatrix row_normalized(MatrixXd values);

  const MatrixXd& values() const { return values_; }
  const VectorXd& row_scale() const { return row_scale_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  bool rows_have_unit_max() const;

 private:
  MatrixXd values_;
  VectorXd row_scale_;
};

// Checks entries are finite and non-negative and no row is all zero.
// Throws InvalidInput naming the first offending (row, column).
void validate(const MatrixXd& values);

LikelihoodMatrix build_likelihood_matrix(const ObservationSet& obs,
                                         const VarianceGrid& grid);

// sigma = {0, geometric sequence from min(s)/10 to sigma_max}. sigma_max is
// 2 * max_j sqrt(max(z_j^2 - s_j^2, 0)), floored at twice the lower end;
// `max_sigma_override` (> 0) replaces it.
VarianceGrid select_grid(const ObservationSet& obs, Index m,
                         double max_sigma_override = 0.0);

}  // namespace mixsqp
