#include "rbfshape/kernel.hpp"

#include "rbfshape/errors.hpp"

#include <cmath>

namespace rbfshape {

namespace {

void check_radius(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw InvalidArgument("kernel radius must be finite and non-negative");
  }
}

}  // namespace

KernelSpec KernelSpec::parse(const std::string& name, double beta) {
  if (name == "gaussian" || name == "ga") return gaussian();
  if (name == "imq" || name == "inverse-multiquadric") {
    if (!(beta > 0.0)) throw InvalidArgument("imq beta must be positive");
    return imq(beta);
  }
  throw InvalidArgument("unknown kernel '" + name + "'");
}

std::string KernelSpec::name() const {
  return family == KernelFamily::Gaussian ? "gaussian" : "imq";
}

void check_shape(double eps) {
  if (!std::isfinite(eps) || !(eps > 0.0)) {
    throw InvalidArgument("shape parameter must be finite and positive, got " + std::to_string(eps));
  }
}

double kernel_eval(const KernelSpec& kernel, double r, double eps) {
  check_shape(eps);
  check_radius(r);
  const double er2 = (eps * r) * (eps * r);
  if (kernel.family == KernelFamily::Gaussian) return std::exp(-er2);
  return std::pow(1.0 + er2, -0.5 * kernel.imq_beta);
}

double kernel_deps(const KernelSpec& kernel, double r, double eps) {
  check_shape(eps);
  check_radius(r);
  const double r2 = r * r;
  const double er2 = eps * eps * r2;
  if (kernel.family == KernelFamily::Gaussian) return -2.0 * eps * r2 * std::exp(-er2);
  const double beta = kernel.imq_beta;
  return -beta * eps * r2 * std::pow(1.0 + er2, -0.5 * beta - 1.0);
}

double kernel_laplacian(const KernelSpec& kernel, double r, double eps, int dim) {
  check_shape(eps);
  check_radius(r);
  // phi = g(q) with q = r^2 gives  Lap phi = 4 q g''(q) + 2 dim g'(q).
  const double s = eps * eps;
  const double q = r * r;
  double g1 = 0.0;
  double g2 = 0.0;
  if (kernel.family == KernelFamily::Gaussian) {
    const double g = std::exp(-s * q);
    g1 = -s * g;
    g2 = s * s * g;
  } else {
    const double h = 0.5 * kernel.imq_beta;
    const double base = 1.0 + s * q;
    g1 = -h * s * std::pow(base, -h - 1.0);
    g2 = h * (h + 1.0) * s * s * std::pow(base, -h - 2.0);
  }
  return 4.0 * q * g2 + 2.0 * dim * g1;
}

}  // namespace rbfshape
