#pragma once

#include "rbfshape/conditioning.hpp"
#include "rbfshape/kernel.hpp"
#include "rbfshape/point_cloud.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace rbfshape {

struct DatasetRecord {
  PointCloud points;  // sorted
  double eps_label;
  int dim;
  double domain_scale;       // upper bound L of the generation interval [0, L]
  std::string generator_fn;  // metadata tag only
};

/// One row of the generation tables: `samples` records drawn on [0, domain_scale]^dim.
/// With parent_points > 0, `parent_clouds` clouds of that size are drawn first and every
/// record is an N-point subset of one of them.
struct GenerationCell {
  int dim = 1;
  double domain_scale = 1.0;
  std::string generator_fn;
  int samples = 700;
  int parent_clouds = 0;
  int parent_points = 0;
};

struct GenerationConfig {
  std::vector<GenerationCell> cells;
  int n = 10;
  KernelSpec kernel;
  CondBand band;
  OptimizerConfig optimizer{.max_iters = 100};  // one trial
  int max_trials = 40;
  std::uint64_t seed = 0;

  void validate() const;

  /// 1D table: three functions x three intervals x 700 samples, times `scale`.
  static GenerationConfig one_dimensional(double scale = 1.0);
  /// 2D table: three functions x four intervals x 20 parent clouds x 50 subsets, times `scale`.
  static GenerationConfig two_dimensional(double scale = 1.0);
};

/// N i.i.d. uniform points on [lo, hi]^dim, sorted; colliding draws are redrawn.
PointCloud sample_cloud(int dim, double lo, double hi, int n, std::mt19937_64& rng);

struct LabelOutcome {
  bool accepted = false;
  double eps = 0.0;
  double logcond = 0.0;
  int trials = 0;
};

/// Hardy initialization, then repeated optimizer trials until the banded loss is within
/// the optimizer tolerance or max_trials is exceeded.
LabelOutcome label_cloud(const PointCloud& cloud, const GenerationConfig& config);

std::optional<DatasetRecord> generate_record(const PointCloud& cloud, const GenerationCell& cell,
                                             const GenerationConfig& config);

struct CellSummary {
  GenerationCell cell;
  int accepted = 0;
  int rejected = 0;
};

struct DatasetSummary {
  std::vector<CellSummary> cells;
  int accepted() const;
  int rejected() const;
};

/// Deterministic for a fixed config; per-sample streams derive from the master seed.
std::vector<DatasetRecord> generate_records(const GenerationConfig& config,
                                            DatasetSummary* summary = nullptr);

DatasetSummary generate_dataset(const GenerationConfig& config, const std::filesystem::path& out);

/// One JSON object per line: dim, points, eps, domain_scale, generator_fn.
std::string record_to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const std::string& line);

void write_records(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);
std::vector<DatasetRecord> read_records(const std::filesystem::path& path);

}  // namespace rbfshape
