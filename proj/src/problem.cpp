#include "mixsqp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mixsqp/error.hpp"

namespace mixsqp {

namespace {

std::string at(Index j, Index k) {
  return "(" + std::to_string(j) + ", " + std::to_string(k) + ")";
}

}  // namespace

void ObservationSet::validate() const {
  if (z.size() != s.size())
    throw InvalidInput("observation set: " + std::to_string(z.size()) +
                       " effects but " + std::to_string(s.size()) +
                       " standard errors");
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!std::isfinite(z[j]) || !std::isfinite(s[j]))
      throw InvalidInput("observation set: non-finite value in row " +
                         std::to_string(j));
    if (!(s[j] > 0.0))
      throw InvalidInput("observation set: standard error must be positive in row " +
                         std::to_string(j));
  }
}

void VarianceGrid::validate() const {
  if (sigma.empty()) throw InvalidInput("variance grid is empty");
  if (!std::isfinite(sigma[0]) || sigma[0] < 0.0)
    throw InvalidInput("variance grid: sigma[0] must be finite and >= 0");
  for (std::size_t k = 1; k < sigma.size(); ++k) {
    if (!std::isfinite(sigma[k]) || !(sigma[k] > sigma[k - 1]))
      throw InvalidInput("variance grid: not strictly increasing at index " +
                         std::to_string(k));
  }
}

void validate(const MatrixXd& values) {
  if (values.rows() < 1 || values.cols() < 1)
    throw InvalidInput("likelihood matrix must be at least 1 x 1");
  for (Index j = 0; j < values.rows(); ++j) {
    bool any_positive = false;
    for (Index k = 0; k < values.cols(); ++k) {
      const double v = values(j, k);
      if (!std::isfinite(v)) throw InvalidInput("non-finite entry at " + at(j, k));
      if (v < 0.0) throw InvalidInput("negative entry at " + at(j, k));
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) throw InvalidInput("all-zero row " + std::to_string(j));
  }
}

LikelihoodMatrix::LikelihoodMatrix(MatrixXd values)
    : LikelihoodMatrix(std::move(values), VectorXd()) {}

LikelihoodMatrix::LikelihoodMatrix(MatrixXd values, VectorXd row_scale)
    : values_(std::move(values)), row_scale_(std::move(row_scale)) {
  validate(values_);
  if (row_scale_.size() == 0) row_scale_ = VectorXd::Ones(values_.rows());
  if (row_scale_.size() != values_.rows())
    throw InvalidInput("row_scale length does not match the number of rows");
  for (Index j = 0; j < row_scale_.size(); ++j)
    if (!std::isfinite(row_scale_[j]) || !(row_scale_[j] > 0.0))
      throw InvalidInput("row_scale must be positive and finite (row " +
                         std::to_string(j) + ")");
}

LikelihoodMatrix LikelihoodMatrix::row_normalized(MatrixXd values) {
  validate(values);
  VectorXd scale = values.rowwise().maxCoeff();
  for (Index j = 0; j < values.rows(); ++j) values.row(j) /= scale[j];
  return LikelihoodMatrix(std::move(values), std::move(scale));
}

bool LikelihoodMatrix::rows_have_unit_max() const {
  for (Index j = 0; j < rows(); ++j)
    if (values_.row(j).maxCoeff() != 1.0) return false;
  return true;
}

LikelihoodMatrix build_likelihood_matrix(const ObservationSet& obs,
                                         const VarianceGrid& grid) {
  obs.validate();
  grid.validate();
  if (obs.size() == 0) throw InvalidInput("observation set is empty");
  const Index n = static_cast<Index>(obs.size());
  const Index m = static_cast<Index>(grid.size());
  MatrixXd values(n, m);
  VectorXd scale(n);
  // Rows are independent; a bad row is reported after the loop so the
  // message names the first one deterministically.
  Index bad_row = n;
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
#pragma omp parallel
  {
    std::vector<double> logs(static_cast<std::size_t>(m));
#pragma omp for schedule(static) reduction(min : bad_row)
    for (Index j = 0; j < n; ++j) {
      const double z = obs.z[static_cast<std::size_t>(j)];
      const double s2 = obs.s[static_cast<std::size_t>(j)] * obs.s[static_cast<std::size_t>(j)];
      double top = -std::numeric_limits<double>::infinity();
      bool finite = true;
      for (Index k = 0; k < m; ++k) {
        const double sk = grid.sigma[static_cast<std::size_t>(k)];
        const double var = sk * sk + s2;
        const double lg = -0.5 * (log_two_pi + std::log(var)) - 0.5 * z * z / var;
        finite = finite && std::isfinite(lg);
        logs[static_cast<std::size_t>(k)] = lg;
        top = std::max(top, lg);
      }
      const double row_max = std::exp(top);
      if (!finite || !std::isfinite(row_max) || !(row_max > 0.0)) {
        bad_row = std::min(bad_row, j);
        continue;
      }
      for (Index k = 0; k < m; ++k)
        values(j, k) = std::exp(logs[static_cast<std::size_t>(k)] - top);
      scale[j] = row_max;
    }
  }
  if (bad_row < n)
    throw InvalidInput("likelihood matrix: density not representable in row " +
                       std::to_string(bad_row));
  return LikelihoodMatrix(std::move(values), std::move(scale));
}

VarianceGrid select_grid(const ObservationSet& obs, Index m,
                         double max_sigma_override) {
  if (m < 2) throw InvalidInput("grid size must be at least 2");
  obs.validate();
  if (obs.size() == 0) throw InvalidInput("observation set is empty");
  const double s_min = *std::min_element(obs.s.begin(), obs.s.end());
  const double lo = s_min / 10.0;
  double hi = 0.0;
  for (std::size_t j = 0; j < obs.size(); ++j)
    hi = std::max(hi, std::sqrt(std::max(obs.z[j] * obs.z[j] - obs.s[j] * obs.s[j], 0.0)));
  hi *= 2.0;
  if (max_sigma_override > 0.0) {
    if (!(max_sigma_override > lo))
      throw InvalidInput("grid maximum sigma must exceed min(s)/10");
    hi = max_sigma_override;
  } else {
    hi = std::max(hi, 2.0 * lo);
  }
  VarianceGrid grid;
  grid.sigma.resize(static_cast<std::size_t>(m));
  grid.sigma[0] = 0.0;
  if (m == 2) {
    grid.sigma[1] = hi;
    return grid;
  }
  const double ratio = std::log(hi / lo);
  for (Index k = 1; k < m; ++k) {
    const double t = static_cast<double>(k - 1) / static_cast<double>(m - 2);
    grid.sigma[static_cast<std::size_t>(k)] = lo * std::exp(t * ratio);
  }
  grid.sigma.back() = hi;
  return grid;
}

}  // namespace mixsqp
