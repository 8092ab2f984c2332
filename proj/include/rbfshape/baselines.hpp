#pragma once

#include "rbfshape/kernel.hpp"
#include "rbfshape/point_cloud.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace rbfshape {

/// Strictly increasing list of positive candidate shape parameters.
class EpsGrid {
 public:
  explicit EpsGrid(std::vector<double> candidates);

  /// The 24-value search list 0.001 ... 1000.
  static EpsGrid standard();

  const std::vector<double>& candidates() const noexcept { return candidates_; }
  std::size_t size() const noexcept { return candidates_.size(); }

 private:
  std::vector<double> candidates_;
};

struct LoocvResult {
  double eps = 0.0;
  /// Euclidean norm of the error vector per candidate; NaN where skipped.
  std::vector<double> error_norms;
  std::vector<double> skipped;
};

/// Candidates whose estimated condition exceeds this are skipped.
inline constexpr double kRippaSkipCondition = 1e15;

/// 1 / (0.815 d), d = mean nearest-neighbour distance.
double hardy_shape(const PointCloud& cloud);

/// 0.8 sqrt(N) / D, D = diameter of the minimal enclosing circle.
double franke_shape(const PointCloud& cloud);

/// 0.8 N^(1/4) / D.
double modified_franke_shape(const PointCloud& cloud);

double mean_nearest_neighbor_distance(const PointCloud& cloud);

/// E_k = (A^-1 f)_k / (A^-1)_kk, or nullopt when the matrix is too ill-conditioned
/// to trust (estimated condition > kRippaSkipCondition).
std::optional<Eigen::VectorXd> rippa_error_vector(const PointCloud& cloud,
                                                  std::span<const double> values, double eps,
                                                  const KernelSpec& kernel);

/// Argmin of ||E(eps)||_2 over the grid; ties resolve to the smallest eps.
/// Throws NoFeasibleCandidateError when every candidate is skipped.
LoocvResult rippa_shape(const PointCloud& cloud, std::span<const double> values,
                        const KernelSpec& kernel, const EpsGrid& grid = EpsGrid::standard());

}  // namespace rbfshape
