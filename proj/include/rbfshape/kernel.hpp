#pragma once

#include <string>

namespace rbfshape {

enum class KernelFamily { Gaussian, InverseMultiquadric };

/// Positive definite radial kernel phi(r; eps) with phi(0) = 1.
///
/// Gaussian:              exp(-(eps r)^2)
/// Inverse multiquadric:  (1 + (eps r)^2)^(-beta/2)
struct KernelSpec {
  KernelFamily family = KernelFamily::InverseMultiquadric;
  double imq_beta = 1.0;

  static KernelSpec gaussian() { return {KernelFamily::Gaussian, 1.0}; }
  static KernelSpec imq(double beta = 1.0) { return {KernelFamily::InverseMultiquadric, beta}; }

  /// "gaussian" or "imq"; beta is kept separately.
  static KernelSpec parse(const std::string& name, double beta = 1.0);
  std::string name() const;
};

/// Throws InvalidArgument unless eps is finite and positive.
void check_shape(double eps);

double kernel_eval(const KernelSpec& kernel, double r, double eps);

/// Analytic d phi / d eps.
double kernel_deps(const KernelSpec& kernel, double r, double eps);

/// Laplacian in `dim` space dimensions of x -> phi(|x - c|; eps), as a function of r = |x - c|.
double kernel_laplacian(const KernelSpec& kernel, double r, double eps, int dim);

}  // namespace rbfshape
