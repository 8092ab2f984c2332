#include "rbfshape/interpolation.hpp"

#include "rbfshape/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace rbfshape {

ShapeParameter::ShapeParameter(double eps) : eps_(eps) { check_shape(eps); }

DistanceMatrix::DistanceMatrix(const PointCloud& cloud) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  entries_.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (cloud[i] - cloud[j]).norm();
      if (!(d > 0.0)) {
        throw DegenerateCloudError("points " + std::to_string(i) + " and " + std::to_string(j) +
                                   " coincide");
      }
      entries_(i, j) = d;
      entries_(j, i) = d;
    }
  }
}

DistanceMatrix distance_matrix(const PointCloud& cloud) { return DistanceMatrix(cloud); }

Eigen::MatrixXd interpolation_matrix(const DistanceMatrix& distances, double eps,
                                     const KernelSpec& kernel) {
  check_shape(eps);
  const auto n = distances.size();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_eval(kernel, distances(i, j), eps);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

Eigen::MatrixXd interpolation_matrix(const PointCloud& cloud, double eps, const KernelSpec& kernel) {
  return interpolation_matrix(DistanceMatrix(cloud), eps, kernel);
}

Eigen::MatrixXd interpolation_matrix_deps(const DistanceMatrix& distances, double eps,
                                          const KernelSpec& kernel) {
  check_shape(eps);
  const auto n = distances.size();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_deps(kernel, distances(i, j), eps);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace {

constexpr double kBackwardTol = 1e-12;
constexpr double kMaxCond = 1e16;

bool residual_ok(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs, double tol,
                 ResidualCheck check, double rcond) {
  if (!x.allFinite()) return false;
  const double scale = rhs.lpNorm<Eigen::Infinity>();
  const double res = (a * x - rhs).lpNorm<Eigen::Infinity>();
  if (res <= tol * scale) return true;
  if (check == ResidualCheck::Rhs || !(rcond * kMaxCond > 1.0)) return false;
  const double a_norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  return res <= kBackwardTol * (a_norm * x.lpNorm<Eigen::Infinity>() + scale);
}

}  // namespace

Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, double tol,
                                ResidualCheck check) {
  if (a.rows() != a.cols() || a.rows() != rhs.size()) {
    throw InvalidArgument("solve_symmetric: dimension mismatch");
  }
  if (rhs.lpNorm<Eigen::Infinity>() == 0.0) return Eigen::VectorXd::Zero(rhs.size());

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (residual_ok(a, x, rhs, tol, check, ldlt.rcond())) return x;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  Eigen::VectorXd x = lu.solve(rhs);
  if (x.allFinite() && !residual_ok(a, x, rhs, tol, check, rcond)) {
    x += lu.solve(rhs - a * x);  // one step of iterative refinement
  }
  if (residual_ok(a, x, rhs, tol, check, rcond)) return x;

  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  throw IllConditionedSolveError(
      "linear solve missed residual tolerance (estimated condition " + std::to_string(cond) + ")",
      cond);
}

Interpolant fit_interpolant(const PointCloud& cloud, std::span<const double> values, double eps,
                            const KernelSpec& kernel, bool augment_constant, ResidualCheck check) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (static_cast<Eigen::Index>(values.size()) != n) {
    throw InvalidArgument("fit_interpolant: " + std::to_string(values.size()) + " values for " +
                          std::to_string(n) + " centers");
  }
  const Eigen::MatrixXd phi = interpolation_matrix(cloud, eps, kernel);
  const Eigen::Index m = augment_constant ? 1 : 0;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + m, n + m);
  a.topLeftCorner(n, n) = phi;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = values[static_cast<std::size_t>(i)];
  if (m == 1) {
    a.block(0, n, n, 1).setOnes();
    a.block(n, 0, 1, n).setOnes();
  }

  const Eigen::VectorXd c = solve_symmetric(a, rhs, 1e-8, check);
  return Interpolant{cloud, ShapeParameter(eps), kernel, c.head(n), c.tail(m)};
}

double eval_interpolant(const Interpolant& s, const Point& query) {
  const double eps = s.eps.value();
  double acc = s.gamma.size() > 0 ? s.gamma(0) : 0.0;
  for (std::size_t i = 0; i < s.centers.size(); ++i) {
    acc += s.lambda(static_cast<Eigen::Index>(i)) *
           kernel_eval(s.kernel, (query - s.centers[i]).norm(), eps);
  }
  return acc;
}

double l2_error(std::span<const double> exact, std::span<const double> approx) {
  if (exact.size() != approx.size()) {
    throw InvalidArgument("l2_error: length mismatch (" + std::to_string(exact.size()) + " vs " +
                          std::to_string(approx.size()) + ")");
  }
  if (exact.empty()) throw InvalidArgument("l2_error: no evaluation points");
  double acc = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double d = exact[i] - approx[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(exact.size()));
}

}  // namespace rbfshape
