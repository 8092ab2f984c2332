#pragma once

#include "rbfshape/conditioning.hpp"
#include "rbfshape/kernel.hpp"
#include "rbfshape/neural.hpp"
#include "rbfshape/point_cloud.hpp"

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace rbfshape {

enum class InitPolicy { NnOutput, Fixed };

struct FallbackConfig {
  /// Condition threshold (not its log). Infinity accepts every non-singular prediction.
  double theta = std::numeric_limits<double>::infinity();
  CondBand band;
  OptimizerConfig optimizer;
  KernelSpec kernel;
  InitPolicy init = InitPolicy::NnOutput;
  double fixed_init = 400.0;
  /// Optimizer restarts (each continuing from the last eps) before giving up.
  int max_trials = 4;

  static double theta_from_log(double log10_theta);
  void validate() const;
};

enum class EpsSource { Nn, Optimizer };

struct FallbackOutcome {
  double eps = 0.0;
  EpsSource source = EpsSource::Nn;
  double achieved_cond = 0.0;
  bool corrected = false;
  double nn_eps = 0.0;  // raw prediction, kept for reporting
};

/// Frobenius condition of the interpolation matrix, +inf when numerically singular.
double condition_or_inf(const PointCloud& cloud, double eps, const KernelSpec& kernel);

/// Accept `predicted` when it is positive, finite and gives cond <= theta; otherwise
/// re-optimize. When log10(theta) lies below band.b the target band is shifted down to
/// end just under theta. Throws GuaranteeViolationError if cond <= theta is not reached.
FallbackOutcome apply_fallback(const PointCloud& cloud, double predicted, const FallbackConfig& config);

FallbackOutcome predict_shape(const MlpModel& model, const PointCloud& cloud,
                              const FallbackConfig& config);

/// Mean of all pairwise distances.
double mean_pairwise_distance(const PointCloud& cloud);

struct HistogramBin {
  double lo;
  double hi;
  int corrected;
  int training;
};

struct FallbackReport {
  int total = 0;
  int corrected = 0;
  double correction_rate = 0.0;
  /// Log-spaced bins of mean pairwise distance: corrected clouds vs training clouds.
  std::vector<HistogramBin> histogram;
};

FallbackReport fallback_report(std::span<const PointCloud> clouds,
                               std::span<const FallbackOutcome> outcomes,
                               std::span<const double> training_mean_distances, int bins = 20);

/// bin_lo,bin_hi,corrected,training
void write_histogram_csv(const FallbackReport& report, const std::filesystem::path& path);

}  // namespace rbfshape
