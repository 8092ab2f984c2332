#include "rbfshape/conditioning.hpp"
#include "rbfshape/errors.hpp"
#include "rbfshape/interpolation.hpp"
#include "rbfshape/kernel.hpp"
#include "rbfshape/point_cloud.hpp"
#include "rbfshape/baselines.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>

using namespace rbfshape;
using rbfshape::gen::random_cloud;
using rbfshape::gen::rel_diff;

namespace {

const KernelSpec kGauss = KernelSpec::gaussian();
const KernelSpec kImq = KernelSpec::imq();

}  // namespace

TEST(Kernel, HandValues) {
  EXPECT_DOUBLE_EQ(kernel_eval(kGauss, 0.0, 5.0), 1.0);
  EXPECT_NEAR(kernel_eval(kGauss, 1.0, 1.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(kernel_eval(kImq, 1.0, 1.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(kernel_eval(KernelSpec::imq(2.0), 1.0, 1.0), 0.5, 1e-15);
}

TEST(Kernel, ShapeDerivativeHandValues) {
  EXPECT_EQ(kernel_deps(kGauss, 0.0, 3.0), 0.0);
  EXPECT_NEAR(kernel_deps(kGauss, 1.0, 1.0), -2.0 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(kernel_deps(kImq, 1.0, 1.0), -std::pow(2.0, -1.5), 1e-15);
}

TEST(Kernel, RejectsBadShape) {
  const double bad[] = {0.0, -1.0, std::numeric_limits<double>::infinity(), std::nan("")};
  for (double eps : bad) {
    EXPECT_THROW(kernel_eval(kGauss, 1.0, eps), InvalidArgument);
    EXPECT_THROW(check_shape(eps), InvalidArgument);
  }
}

TEST(Kernel, ParseNames) {
  EXPECT_EQ(KernelSpec::parse("gaussian").family, KernelFamily::Gaussian);
  EXPECT_EQ(KernelSpec::parse("imq", 3.0).imq_beta, 3.0);
  EXPECT_EQ(KernelSpec::parse("imq").name(), "imq");
  EXPECT_THROW(KernelSpec::parse("matern"), InvalidArgument);
}

TEST(KernelProperty, ShapeDerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (const auto& k : {kGauss, kImq}) {
    for (int t = 0; t < 500; ++t) {
      const double r = gen::log_uniform(rng, 1e-3, 10.0);
      const double eps = gen::log_uniform(rng, 0.1, 100.0);
      const double phi = kernel_eval(k, r, eps);
      // Skip points where the Gaussian has underflowed to nothing measurable.
      if (phi < 1e-200) continue;
      // Step shrinks where the kernel varies fast in eps; the absolute term is the rounding floor.
      const double h = 1e-5 * eps / std::max(1.0, (eps * r) * (eps * r));
      const double fd = (kernel_eval(k, r, eps + h) - kernel_eval(k, r, eps - h)) / (2.0 * h);
      const double an = kernel_deps(k, r, eps);
      EXPECT_LE(std::abs(fd - an), 1e-6 * std::abs(an) + 1e-14 * phi / h) << k.name() << " r=" << r << " eps=" << eps;
    }
  }
}

TEST(KernelProperty, LaplacianMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (const auto& k : {kGauss, kImq}) {
    for (int dim : {1, 2}) {
      for (int t = 0; t < 100; ++t) {
        const double eps = gen::uniform(rng, 0.5, 3.0);
        const Point c(gen::uniform(rng, -1, 1), dim == 2 ? gen::uniform(rng, -1, 1) : 0.0);
        const Point x(gen::uniform(rng, -1, 1), dim == 2 ? gen::uniform(rng, -1, 1) : 0.0);
        auto u = [&](const Point& p) { return kernel_eval(k, (p - c).norm(), eps); };
        const double h = 1e-4;
        double fd = 0.0;
        for (int d = 0; d < dim; ++d) {
          Point e = Point::Zero();
          e(d) = h;
          fd += (u(x + e) - 2.0 * u(x) + u(x - e)) / (h * h);
        }
        EXPECT_NEAR(kernel_laplacian(k, (x - c).norm(), eps, dim), fd, 1e-5 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST(PointCloud, RejectsDuplicatesAndTinyClouds) {
  const double dup[] = {0.0, 0.0};
  EXPECT_THROW(PointCloud::from_1d(dup), DegenerateCloudError);
  const double one[] = {0.5};
  EXPECT_THROW(PointCloud::from_1d(one), DegenerateCloudError);
  EXPECT_THROW(PointCloud({Point(0, 0), Point(1, 0)}, 3), InvalidArgument);
}

TEST(PointCloud, SortRules) {
  const double xs[] = {3.0, 0.0, 1.0};
  const PointCloud s = sort_cloud(PointCloud::from_1d(xs));
  EXPECT_EQ(s[0].x(), 0.0);
  EXPECT_EQ(s[1].x(), 1.0);
  EXPECT_EQ(s[2].x(), 3.0);

  const PointCloud c2({Point(1, 0), Point(0, 5), Point(0, 1)}, 2);
  const PointCloud s2 = sort_cloud(c2);
  EXPECT_EQ(s2[0], Point(0, 1));
  EXPECT_EQ(s2[1], Point(0, 5));
  EXPECT_EQ(s2[2], Point(1, 0));
  EXPECT_EQ(sort_cloud(s2).points(), s2.points());
}

TEST(DistanceMatrix, HandValues) {
  const double xs[] = {0.0, 1.0, 3.0};
  const DistanceMatrix d(PointCloud::from_1d(xs));
  Eigen::Matrix3d expect;
  expect << 0, 1, 3, 1, 0, 2, 3, 2, 0;
  EXPECT_EQ(d.entries(), Eigen::MatrixXd(expect));

  const DistanceMatrix d2(PointCloud({Point(0, 0), Point(3, 4)}, 2));
  EXPECT_DOUBLE_EQ(d2(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(d2(1, 0), 5.0);
  EXPECT_EQ(d2(0, 0), 0.0);
}

TEST(InterpolationMatrix, HandValues) {
  const double two[] = {0.0, 1.0};
  const Eigen::MatrixXd g = interpolation_matrix(PointCloud::from_1d(two), 1.0, kGauss);
  EXPECT_EQ(g(0, 0), 1.0);
  EXPECT_NEAR(g(0, 1), std::exp(-1.0), 1e-15);

  const double three[] = {0.0, 1.0, 3.0};
  const Eigen::MatrixXd a = interpolation_matrix(PointCloud::from_1d(three), 1.0, kImq);
  EXPECT_NEAR(a(0, 1), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(a(0, 2), 1.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(a(1, 2), 1.0 / std::sqrt(5.0), 1e-15);
}

TEST(InterpolationMatrixProperty, SymmetricUnitDiagonal) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const int dim = 1 + t % 2;
    const PointCloud c = random_cloud(rng, dim, 2 + t % 12, gen::log_uniform(rng, 1e-3, 1.0));
    const double eps = gen::log_uniform(rng, 0.01, 1e4);
    const Eigen::MatrixXd a = interpolation_matrix(c, eps, t % 3 ? kImq : kGauss);
    EXPECT_TRUE(a == a.transpose());
    for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_EQ(a(i, i), 1.0);
  }
}

TEST(InterpolationMatrixProperty, IdentityRegimeGerschgorin) {
  std::mt19937_64 rng(22);
  // The IMQ decays like 1 / (eps r), so it needs a much larger eps than the Gaussian.
  const std::pair<KernelSpec, double> cases[] = {{kGauss, 1e8}, {kImq, 1e13}};
  for (int t = 0; t < 100; ++t) {
    const PointCloud c = random_cloud(rng, 1 + t % 2, 10, gen::log_uniform(rng, 1e-3, 1.0));
    for (const auto& [k, factor] : cases) {
      const Eigen::MatrixXd a = interpolation_matrix(c, factor / c.min_pairwise_distance(), k);
      const Eigen::MatrixXd off = a - Eigen::MatrixXd::Identity(a.rows(), a.cols());
      EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-12) << k.name();
      EXPECT_LT(off.cwiseAbs().rowwise().sum().maxCoeff(), 1e-11) << k.name();
    }
  }
}

TEST(SolveSymmetric, ZeroRhsAndDimensionMismatch) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_EQ(solve_symmetric(a, Eigen::VectorXd::Zero(3)), Eigen::VectorXd::Zero(3));
  EXPECT_THROW(solve_symmetric(a, Eigen::VectorXd::Ones(2)), InvalidArgument);
}

TEST(SolveSymmetric, SingularSystemCarriesCondition) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 0;
  try {
    solve_symmetric(a, b);
    FAIL() << "expected IllConditionedSolveError";
  } catch (const IllConditionedSolveError& e) {
    EXPECT_GT(e.condition_estimate(), 1e15);
  }
}

TEST(SolveSymmetric, IndefiniteSaddlePoint) {
  Eigen::MatrixXd a(3, 3);
  a << 1, 0.5, 1, 0.5, 1, 1, 1, 1, 0;
  Eigen::VectorXd b(3);
  b << 2, -1, 0.5;
  const Eigen::VectorXd x = solve_symmetric(a, b);
  EXPECT_LE((a * x - b).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(FitInterpolant, ZeroValues) {
  const PointCloud c = gen::equidistant(5);
  const std::vector<double> v(5, 0.0);
  const Interpolant s = fit_interpolant(c, v, 3.0, kImq, true);
  EXPECT_EQ(s.lambda, Eigen::VectorXd::Zero(5));
  EXPECT_EQ(s.gamma, Eigen::VectorXd::Zero(1));
}

TEST(FitInterpolant, KernelColumnGivesUnitVector) {
  const double xs[] = {0.0, 0.7};
  const PointCloud c = PointCloud::from_1d(xs);
  const std::vector<double> v{1.0, kernel_eval(kImq, 0.7, 2.0)};
  const Interpolant s = fit_interpolant(c, v, 2.0, kImq);
  EXPECT_NEAR(s.lambda(0), 1.0, 1e-14);
  EXPECT_NEAR(s.lambda(1), 0.0, 1e-14);
  EXPECT_EQ(s.gamma.size(), 0);
}

TEST(FitInterpolant, OptimizerShapeReproducesF1AtNodes) {
  const PointCloud c = gen::equidistant(10);
  std::vector<double> v;
  for (const auto& p : c) v.push_back(std::exp(std::sin(std::numbers::pi * p.x())));
  const OptimizeResult r = optimize_shape(c, kImq, CondBand{}, hardy_shape(c));
  ASSERT_TRUE(r.converged);
  const Interpolant s = fit_interpolant(c, v, r.eps, kImq);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(eval_interpolant(s, c[i]), v[i], 1e-8);
}

TEST(FitInterpolant, LengthMismatch) {
  const std::vector<double> v{1.0, 2.0};
  EXPECT_THROW(fit_interpolant(gen::equidistant(3), v, 1.0, kImq), InvalidArgument);
}

TEST(EvalInterpolant, ConstantTermAndFarField) {
  const PointCloud c = gen::equidistant(4);
  Interpolant s{c, ShapeParameter(2.0), kGauss, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(1, 3.5)};
  EXPECT_EQ(eval_interpolant(s, Point(0.3, 0)), 3.5);
  s.lambda = Eigen::VectorXd::Ones(4);
  EXPECT_NEAR(eval_interpolant(s, Point(100.0, 0)), 3.5, 1e-15);
}

TEST(FitInterpolantProperty, ReproducesDataOrReportsIllConditioning) {
  std::mt19937_64 rng(31);
  int solved = 0;
  for (int t = 0; t < 200; ++t) {
    const int dim = 1 + t % 2;
    const double scale = gen::log_uniform(rng, 1e-3, 1.0);
    const PointCloud c = random_cloud(rng, dim, 4 + t % 7, scale, 0.05);
    const double eps = gen::log_uniform(rng, 1.0, 30.0) / scale;
    std::vector<double> v;
    for (int i = 0; i < static_cast<int>(c.size()); ++i) v.push_back(gen::uniform(rng, -1, 1));
    const bool augment = t % 2 == 0;
    std::optional<Interpolant> s;
    try {
      s = fit_interpolant(c, v, eps, t % 3 ? kImq : kGauss, augment);
    } catch (const IllConditionedSolveError& e) {
      EXPECT_GT(e.condition_estimate(), 1e6);
      continue;
    }
    ++solved;
    double vmax = 0.0;
    for (double x : v) vmax = std::max(vmax, std::abs(x));
    // Re-evaluating the sum adds rounding of order u * sum |lambda_i| on top of the solve residual.
    const double tol = 1e-8 * vmax + 8.0 * std::numeric_limits<double>::epsilon() * s->lambda.cwiseAbs().sum();
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(eval_interpolant(*s, c[i]), v[i], tol);
    if (augment) EXPECT_NEAR(s->lambda.sum(), 0.0, 1e-8 * (1.0 + s->lambda.cwiseAbs().sum()));
  }
  EXPECT_GE(solved, 150);
}

TEST(FitInterpolantProperty, ConstantsAreExactWithAugmentation) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 100; ++t) {
    const PointCloud c = random_cloud(rng, 1 + t % 2, 3 + t % 8, 1.0, 0.05);
    const double value = gen::uniform(rng, -5, 5);
    const std::vector<double> v(c.size(), value);
    // eps r >= 0.5 for every pair keeps the saddle system well conditioned.
    const Interpolant s = fit_interpolant(c, v, gen::uniform(rng, 10, 50), kImq, true);
    EXPECT_LE(s.lambda.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(s.gamma(0), value, 1e-10);
  }
}

TEST(FitInterpolant, BackwardCheckAcceptsStableSolveOfRoughData) {
  const PointCloud c = gen::equidistant(10);
  std::vector<double> step;
  for (const auto& p : c) step.push_back(p.x() < 0.5 ? 0.0 : 1.0);
  const double eps = 0.6;  // log10 cond about 13.3
  EXPECT_THROW(fit_interpolant(c, step, eps, kImq), IllConditionedSolveError);
  const Interpolant s = fit_interpolant(c, step, eps, kImq, false, ResidualCheck::Backward);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(eval_interpolant(s, c[i]), step[i], 1e-3);
}

TEST(L2Error, HandValues) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_EQ(l2_error(a, a), 0.0);
  const std::vector<double> b{1.5, 2.5, 3.5};
  EXPECT_NEAR(l2_error(a, b), 0.5, 1e-15);
  const std::vector<double> z{0.0, 0.0};
  const std::vector<double> d{3.0, 4.0};
  EXPECT_NEAR(l2_error(z, d), std::sqrt(12.5), 1e-15);
  EXPECT_THROW(l2_error(a, d), InvalidArgument);
}
