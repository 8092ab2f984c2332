#pragma once

#include "rbfshape/kernel.hpp"
#include "rbfshape/point_cloud.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace rbfshape {

/// Validated positive, finite shape parameter.
class ShapeParameter {
 public:
  explicit ShapeParameter(double eps);
  double value() const noexcept { return eps_; }

 private:
  double eps_;
};

/// Symmetric N x N Euclidean distances with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(const PointCloud& cloud);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  Eigen::Index size() const noexcept { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

DistanceMatrix distance_matrix(const PointCloud& cloud);

/// a_ij = phi(|x_i - x_j|, eps). Symmetric with unit diagonal by construction.
Eigen::MatrixXd interpolation_matrix(const DistanceMatrix& distances, double eps,
                                     const KernelSpec& kernel);
Eigen::MatrixXd interpolation_matrix(const PointCloud& cloud, double eps, const KernelSpec& kernel);

/// Entrywise d a_ij / d eps.
Eigen::MatrixXd interpolation_matrix_deps(const DistanceMatrix& distances, double eps,
                                          const KernelSpec& kernel);

/// Rhs: ||A x - b||_inf <= tol * ||b||_inf.
/// Backward: Rhs, or a normwise backward error ||A x - b|| / (||A|| ||x|| + ||b||) below
/// 1e-12 while the estimated condition stays under 1e16. Banded shapes put the condition
/// near 1e11, where Rhs is out of reach for rough data even though the solve is stable.
enum class ResidualCheck { Rhs, Backward };

/// Solve a symmetric system: LDLT first, pivoted LU if that misses the residual check.
/// Throws IllConditionedSolveError carrying the estimated condition.
Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                double tol = 1e-8, ResidualCheck check = ResidualCheck::Rhs);

/// s(x) = sum_i lambda_i phi(|x - x_i|, eps) + gamma
struct Interpolant {
  PointCloud centers;
  ShapeParameter eps;
  KernelSpec kernel;
  Eigen::VectorXd lambda;
  Eigen::VectorXd gamma;  // empty, or one constant term
};

Interpolant fit_interpolant(const PointCloud& cloud, std::span<const double> values, double eps,
                            const KernelSpec& kernel, bool augment_constant = false,
                            ResidualCheck check = ResidualCheck::Rhs);

double eval_interpolant(const Interpolant& s, const Point& query);

/// sqrt(mean |exact - approx|^2)
double l2_error(std::span<const double> exact, std::span<const double> approx);

}  // namespace rbfshape
