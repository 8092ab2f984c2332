#include "rbfshape/fallback.hpp"

#include "rbfshape/errors.hpp"
#include "rbfshape/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rbfshape {

double FallbackConfig::theta_from_log(double log10_theta) {
  return std::isinf(log10_theta) && log10_theta > 0 ? std::numeric_limits<double>::infinity()
                                                     : std::pow(10.0, log10_theta);
}

void FallbackConfig::validate() const {
  if (!(theta > 0.0)) throw InvalidArgument("fallback: theta must be positive");
  if (init == InitPolicy::Fixed) check_shape(fixed_init);
  if (max_trials <= 0) throw InvalidArgument("fallback: max_trials must be positive");
  optimizer.validate();
}

double condition_or_inf(const PointCloud& cloud, double eps, const KernelSpec& kernel) {
  try {
    return frobenius_cond(interpolation_matrix(cloud, eps, kernel));
  } catch (const SingularMatrixError&) {
    return std::numeric_limits<double>::infinity();
  }
}

namespace {

bool usable(double eps) { return std::isfinite(eps) && eps > 0.0; }

CondBand target_band(const FallbackConfig& c) {
  const double log_theta = std::log10(c.theta);
  if (log_theta >= c.band.b) return c.band;
  const double b = log_theta - 2.0 * c.optimizer.loss_tol;
  return CondBand(b - (c.band.b - c.band.a), b);
}

}  // namespace

FallbackOutcome apply_fallback(const PointCloud& cloud, double predicted, const FallbackConfig& config) {
  config.validate();
  FallbackOutcome out;
  out.nn_eps = predicted;
  if (usable(predicted)) {
    const double cond = condition_or_inf(cloud, predicted, config.kernel);
    if (std::isfinite(cond) && cond <= config.theta) {
      out.eps = predicted;
      out.achieved_cond = cond;
      return out;
    }
  }

  const CondBand band = target_band(config);
  double eps = config.init == InitPolicy::Fixed || !usable(predicted) ? config.fixed_init : predicted;
  double cond = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < config.max_trials; ++trial) {
    const OptimizeResult r = optimize_shape(cloud, config.kernel, band, eps, config.optimizer);
    eps = r.eps;
    cond = condition_or_inf(cloud, eps, config.kernel);
    if (r.converged) break;
  }
  if (!(std::isfinite(cond) && cond <= config.theta)) {
    std::ostringstream msg;
    msg << "fallback could not reach cond <= " << config.theta << " (best cond " << cond
        << " at eps " << eps << ")";
    throw GuaranteeViolationError(msg.str(), cond);
  }
  out.eps = eps;
  out.source = EpsSource::Optimizer;
  out.achieved_cond = cond;
  out.corrected = true;
  return out;
}

FallbackOutcome predict_shape(const MlpModel& model, const PointCloud& cloud,
                              const FallbackConfig& config) {
  return apply_fallback(cloud, predict_eps(model, cloud), config);
}

double mean_pairwise_distance(const PointCloud& cloud) {
  double sum = 0.0;
  const std::size_t n = cloud.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sum += (cloud[i] - cloud[j]).norm();
  }
  return sum / static_cast<double>(n * (n - 1) / 2);
}

FallbackReport fallback_report(std::span<const PointCloud> clouds,
                               std::span<const FallbackOutcome> outcomes,
                               std::span<const double> training_mean_distances, int bins) {
  if (clouds.size() != outcomes.size()) {
    throw InvalidArgument("fallback_report: clouds and outcomes differ in length");
  }
  if (bins <= 0) throw InvalidArgument("fallback_report: bins must be positive");
  FallbackReport rep;
  rep.total = static_cast<int>(outcomes.size());
  std::vector<double> corrected;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].corrected) corrected.push_back(mean_pairwise_distance(clouds[i]));
  }
  rep.corrected = static_cast<int>(corrected.size());
  rep.correction_rate = rep.total > 0 ? static_cast<double>(rep.corrected) / rep.total : 0.0;

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double d : corrected) lo = std::min(lo, d), hi = std::max(hi, d);
  for (double d : training_mean_distances) lo = std::min(lo, d), hi = std::max(hi, d);
  if (!(lo > 0.0) || !std::isfinite(lo)) return rep;
  if (hi <= lo) hi = lo * 1.0001;

  const double llo = std::log10(lo), lhi = std::log10(hi);
  const double width = (lhi - llo) / bins;
  for (int b = 0; b < bins; ++b) {
    rep.histogram.push_back({std::pow(10.0, llo + b * width), std::pow(10.0, llo + (b + 1) * width), 0, 0});
  }
  auto bin_of = [&](double d) {
    const int b = static_cast<int>((std::log10(d) - llo) / width);
    return std::clamp(b, 0, bins - 1);
  };
  for (double d : corrected) ++rep.histogram[static_cast<std::size_t>(bin_of(d))].corrected;
  for (double d : training_mean_distances) ++rep.histogram[static_cast<std::size_t>(bin_of(d))].training;
  return rep;
}

void write_histogram_csv(const FallbackReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(10);
  out << "bin_lo,bin_hi,corrected,training\n";
  for (const auto& b : report.histogram) {
    out << b.lo << ',' << b.hi << ',' << b.corrected << ',' << b.training << '\n';
  }
}

}  // namespace rbfshape
