#pragma once

#include "rbfshape/interpolation.hpp"
#include "rbfshape/kernel.hpp"
#include "rbfshape/point_cloud.hpp"

#include <Eigen/Core>

namespace rbfshape {

/// Target interval [a, b] for log10 of the Frobenius condition number.
struct CondBand {
  double a = 11.0;
  double b = 11.5;

  CondBand() = default;
  CondBand(double lower, double upper);
};

struct OptimizerConfig {
  double learning_rate = 0.05;  // Adam step on log(eps)
  int max_iters = 500;
  double loss_tol = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double eps_min = 1e-12;

  void validate() const;
};

struct OptimizeResult {
  double eps = 0.0;
  double achieved_logcond = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// ||A||_F * ||A^-1||_F. Throws SingularMatrixError when A is numerically singular
/// (reciprocal condition estimate below machine epsilon).
double frobenius_cond(const Eigen::MatrixXd& a);

double logcond(const PointCloud& cloud, double eps, const KernelSpec& kernel);

/// d/d eps of the Frobenius condition number:
///   ||A^-1|| tr(A A') / ||A|| - ||A|| tr(A' A^-3) / ||A^-1||
double cond_derivative(const PointCloud& cloud, double eps, const KernelSpec& kernel);

/// Piecewise linear, zero on [a, b], slope one outside.
double condition_loss(double x, const CondBand& band);

/// Adam on log(eps) for the banded log-condition loss. A singular matrix during
/// iteration doubles eps. Non-convergence returns the best iterate with converged = false.
OptimizeResult optimize_shape(const PointCloud& cloud, const KernelSpec& kernel,
                              const CondBand& band, double init_eps,
                              const OptimizerConfig& config = {});

/// Shared evaluation used by the optimizer and the fallback check.
struct CondEvaluation {
  double cond;
  double dcond_deps;
};
CondEvaluation evaluate_condition(const DistanceMatrix& distances, double eps,
                                  const KernelSpec& kernel, bool with_derivative);

}  // namespace rbfshape
