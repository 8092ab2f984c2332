#include "rbfshape/baselines.hpp"

#include "rbfshape/enclosing_circle.hpp"
#include "rbfshape/errors.hpp"
#include "rbfshape/interpolation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace rbfshape {

EpsGrid::EpsGrid(std::vector<double> candidates) : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw InvalidArgument("eps grid is empty");
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    check_shape(candidates_[i]);
    if (i > 0 && !(candidates_[i] > candidates_[i - 1])) {
      throw InvalidArgument("eps grid must be strictly increasing");
    }
  }
}

EpsGrid EpsGrid::standard() {
  return EpsGrid({0.001, 0.002, 0.005, 0.0075, 0.01, 0.02, 0.05, 0.075, 0.1, 0.2, 0.5, 0.75,
                  1.0,   2.0,   5.0,   7.5,    10.0, 20.0, 50.0, 75.0,  100.0, 200.0, 500.0,
                  1000.0});
}

double mean_nearest_neighbor_distance(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) best = std::min(best, (cloud[i] - cloud[j]).squaredNorm());
    }
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(n);
}

double hardy_shape(const PointCloud& cloud) {
  return 1.0 / (0.815 * mean_nearest_neighbor_distance(cloud));
}

double franke_shape(const PointCloud& cloud) {
  return 0.8 * std::sqrt(static_cast<double>(cloud.size())) / enclosing_diameter(cloud);
}

double modified_franke_shape(const PointCloud& cloud) {
  return 0.8 * std::pow(static_cast<double>(cloud.size()), 0.25) / enclosing_diameter(cloud);
}

std::optional<Eigen::VectorXd> rippa_error_vector(const PointCloud& cloud,
                                                  std::span<const double> values, double eps,
                                                  const KernelSpec& kernel) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (static_cast<Eigen::Index>(values.size()) != n) {
    throw InvalidArgument("rippa_error_vector: value count does not match cloud size");
  }
  const Eigen::MatrixXd a = interpolation_matrix(cloud, eps, kernel);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || 1.0 / rcond > kRippaSkipCondition) return std::nullopt;

  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::Map<const Eigen::VectorXd> f(values.data(), n);
  const Eigen::VectorXd coeffs = inv * f;
  Eigen::VectorXd e(n);
  for (Eigen::Index k = 0; k < n; ++k) e(k) = coeffs(k) / inv(k, k);
  if (!e.allFinite()) return std::nullopt;
  return e;
}

LoocvResult rippa_shape(const PointCloud& cloud, std::span<const double> values,
                        const KernelSpec& kernel, const EpsGrid& grid) {
  LoocvResult out;
  out.error_norms.reserve(grid.size());
  double best_norm = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double eps : grid.candidates()) {
    const auto e = rippa_error_vector(cloud, values, eps, kernel);
    if (!e) {
      out.error_norms.push_back(std::numeric_limits<double>::quiet_NaN());
      out.skipped.push_back(eps);
      continue;
    }
    const double norm = e->norm();
    out.error_norms.push_back(norm);
    if (norm < best_norm) {  // strict: first (smallest) eps wins ties
      best_norm = norm;
      out.eps = eps;
      found = true;
    }
  }
  if (!found) {
    throw NoFeasibleCandidateError("rippa: all " + std::to_string(grid.size()) +
                                   " candidates were too ill-conditioned");
  }
  return out;
}

}  // namespace rbfshape
