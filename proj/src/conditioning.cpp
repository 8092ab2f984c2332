#include "rbfshape/conditioning.hpp"

#include "rbfshape/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace rbfshape {

CondBand::CondBand(double lower, double upper) : a(lower), b(upper) {
  if (!(lower < upper)) {
    throw InvalidArgument("condition band requires a < b");
  }
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("optimizer learning rate must be positive");
  if (max_iters <= 0) throw InvalidArgument("optimizer max_iters must be positive");
  if (!(loss_tol > 0.0)) throw InvalidArgument("optimizer loss_tol must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("optimizer Adam betas must lie in (0, 1)");
  }
  if (!(eps_min > 0.0)) throw InvalidArgument("optimizer eps_min must be positive");
}

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidArgument("condition number needs a non-empty square matrix");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (u(i, i) == 0.0) throw SingularMatrixError("matrix is singular (zero pivot)");
  }
  const double rcond = lu.rcond();
  if (!(rcond >= std::numeric_limits<double>::epsilon())) {
    throw SingularMatrixError("matrix is numerically singular (rcond " + std::to_string(rcond) +
                              ")");
  }
  Eigen::MatrixXd inv = lu.inverse();
  if (!inv.allFinite()) throw SingularMatrixError("matrix inverse is not finite");
  return inv;
}

}  // namespace

double frobenius_cond(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd inv = checked_inverse(a);
  return a.norm() * inv.norm();
}

CondEvaluation evaluate_condition(const DistanceMatrix& distances, double eps,
                                  const KernelSpec& kernel, bool with_derivative) {
  const Eigen::MatrixXd a = interpolation_matrix(distances, eps, kernel);
  const Eigen::MatrixXd inv = checked_inverse(a);
  const double na = a.norm();
  const double ninv = inv.norm();
  CondEvaluation out{na * ninv, 0.0};
  if (with_derivative) {
    const Eigen::MatrixXd da = interpolation_matrix_deps(distances, eps, kernel);
    const Eigen::MatrixXd inv3 = inv * inv * inv;
    // Both A and A' are symmetric, so tr(X Y) reduces to an entrywise product sum.
    const double tr_a_da = a.cwiseProduct(da).sum();
    const double tr_da_inv3 = da.cwiseProduct(inv3.transpose()).sum();
    out.dcond_deps = ninv * tr_a_da / na - na * tr_da_inv3 / ninv;
  }
  return out;
}

double logcond(const PointCloud& cloud, double eps, const KernelSpec& kernel) {
  return std::log10(evaluate_condition(DistanceMatrix(cloud), eps, kernel, false).cond);
}

double cond_derivative(const PointCloud& cloud, double eps, const KernelSpec& kernel) {
  return evaluate_condition(DistanceMatrix(cloud), eps, kernel, true).dcond_deps;
}

double condition_loss(double x, const CondBand& band) {
  if (x > band.b) return x - band.b;
  if (x < band.a) return band.a - x;
  return 0.0;
}

OptimizeResult optimize_shape(const PointCloud& cloud, const KernelSpec& kernel,
                              const CondBand& band, double init_eps,
                              const OptimizerConfig& config) {
  check_shape(init_eps);
  config.validate();
  const DistanceMatrix distances(cloud);
  const double log_floor = std::log(config.eps_min);

  double log_eps = std::max(std::log(init_eps), log_floor);
  double m = 0.0;
  double v = 0.0;
  int adam_steps = 0;

  OptimizeResult best;
  best.final_loss = std::numeric_limits<double>::infinity();
  best.eps = std::exp(log_eps);
  best.achieved_logcond = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter <= config.max_iters; ++iter) {
    const double eps = std::exp(log_eps);
    CondEvaluation ev{};
    try {
      ev = evaluate_condition(distances, eps, kernel, true);
    } catch (const SingularMatrixError&) {
      // Too flat: conditioning improves with eps.
      log_eps += std::log(2.0);
      continue;
    }
    const double x = std::log10(ev.cond);
    const double loss = condition_loss(x, band);
    if (loss < best.final_loss) {
      best.eps = eps;
      best.achieved_logcond = x;
      best.final_loss = loss;
      best.iterations = iter;
    }
    if (loss <= config.loss_tol) {
      best.converged = true;
      best.iterations = iter;
      return best;
    }
    if (iter == config.max_iters) break;

    const double sign = x > band.b ? 1.0 : -1.0;
    const double dlogcond_deps = ev.dcond_deps / (ev.cond * std::log(10.0));
    const double grad = sign * dlogcond_deps * eps;  // chain rule through log(eps)

    ++adam_steps;
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
    const double m_hat = m / (1.0 - std::pow(config.beta1, adam_steps));
    const double v_hat = v / (1.0 - std::pow(config.beta2, adam_steps));
    log_eps -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    log_eps = std::max(log_eps, log_floor);
  }
  best.iterations = config.max_iters;
  return best;
}

}  // namespace rbfshape
