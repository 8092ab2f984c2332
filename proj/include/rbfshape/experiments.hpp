#pragma once

#include "rbfshape/baselines.hpp"
#include "rbfshape/conditioning.hpp"
#include "rbfshape/fallback.hpp"
#include "rbfshape/kernel.hpp"
#include "rbfshape/neural.hpp"
#include "rbfshape/point_cloud.hpp"
#include "rbfshape/rbffd.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rbfshape {

// ---- meshes -----------------------------------------------------------------

enum class NodeFamily { Equidistant, Chebyshev };

NodeFamily parse_family(const std::string& name);
std::string family_name(NodeFamily f);

/// Level 0: ten nodes on [0, 1]; each level inserts all midpoints (9 * 2^k + 1 nodes).
/// Chebyshev zeros of degree ten are mapped affinely so the extreme zeros land on 0 and 1.
PointCloud make_mesh_1d(int level, NodeFamily family);

/// Consecutive clusters of n nodes sharing their end nodes: [0, n-1], [n-1, 2n-2], ...
std::vector<std::vector<std::size_t>> cluster_1d(std::size_t count, int n);

/// side x side grid on [0, 1]^2, boundary flagged.
std::vector<Point> grid_2d(int side, std::vector<bool>* boundary = nullptr);

/// X = side^2 grid, Y = (2 side)^2 grid (oversampling 4).
NodeSets oversampled_grid_2d(int side);

// ---- test functions ---------------------------------------------------------

struct TestFunction {
  std::string name;
  int dim;
  std::function<double(const Point&)> f;
};

/// f1 exp(sin(pi x)), f2 Runge 1/(1+16x^2), f3 step at 0.5, f4 Franke,
/// f5 boundary-layer product (parameter alpha), const (value 1).
TestFunction test_function(const std::string& name, double alpha = 0.1);

/// Exact 1D heat solution for u(x,0) = x - x^2, series truncated below 1e-14 at t_min.
double heat_u1_exact(double x, double t, double t_min);

// ---- shape strategies -------------------------------------------------------

enum class Strategy { Hardy, Franke, ModFranke, Rippa, Nn, Optimizer };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct ShapeContext {
  KernelSpec kernel;
  CondBand band;
  OptimizerConfig optimizer;
  EpsGrid grid = EpsGrid::standard();
  const MlpModel* model = nullptr;
  FallbackConfig fallback;  // theta applies to the NN strategy
};

struct ShapeChoice {
  double eps = 0.0;
  double logcond = 0.0;  // +inf when singular
  bool corrected = false;
};

/// `values` is only read by Rippa. Throws on strategy failure.
ShapeChoice select_shape(Strategy s, const PointCloud& cloud, std::span<const double> values,
                         const ShapeContext& ctx);

/// select_shape without the condition bookkeeping, for timing.
double shape_only(Strategy s, const PointCloud& cloud, std::span<const double> values,
                  const ShapeContext& ctx);

// ---- experiments ------------------------------------------------------------

enum class Task { Interp1d, Interp2d, Heat1d, Heat2d, Poisson2d, FallbackStudy, Timing };

Task parse_task(const std::string& name);
std::string task_name(Task t);

struct ExperimentConfig {
  Task task = Task::Interp1d;
  std::vector<std::string> functions{"f1"};
  double alpha = 0.1;  // f5 steepness, or heat diffusivity for heat2d
  std::vector<NodeFamily> families{NodeFamily::Equidistant};
  std::vector<int> levels{0, 1, 2, 3, 4};  // 1D refinement levels, or 2D grid sides
  std::vector<Strategy> strategies{Strategy::Hardy, Strategy::Franke, Strategy::ModFranke,
                                   Strategy::Optimizer};
  std::vector<double> log_thetas{std::numeric_limits<double>::infinity()};
  KernelSpec kernel;
  CondBand band;
  int stencil_size = 10;
  double dt = 0.001;
  double t_final = 1.0;
  int timing_repeats = 5;
  std::uint64_t seed = 0;
  std::filesystem::path model_path;
  std::filesystem::path training_data;  // optional, for the fallback histogram
  std::string output = "results.csv";

  /// Defaults per task (e.g. heat2d dt = 0.005, T = 0.5, alpha = 0.01).
  static ExperimentConfig defaults(Task task);
  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& toml_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ConvergenceRow {
  std::string task;
  std::string function;
  std::string family;
  int level = 0;
  std::size_t centers = 0;
  std::string strategy;
  double log_theta = std::numeric_limits<double>::infinity();
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double max_logcond = std::numeric_limits<double>::quiet_NaN();
  int corrections = 0;
  int stencils = 0;
  double seconds = 0.0;
  std::string status = "ok";
};

/// Errors inside one (level, strategy) cell are caught and recorded in `status`.
std::vector<ConvergenceRow> run_interp_experiment(const ExperimentConfig& config, const MlpModel* model);
std::vector<ConvergenceRow> run_pde_experiment(const ExperimentConfig& config, const MlpModel* model);

struct TimingRow {
  std::size_t centers;
  std::string strategy;
  double seconds;  // median wall time to select shapes for every cluster of the mesh
};

std::vector<TimingRow> run_timing(const ExperimentConfig& config, const MlpModel* model);

struct FallbackStudy {
  std::vector<ConvergenceRow> rows;  // one per (theta, function, family, level)
  FallbackReport report;             // clusters seen under the lowest theta
};

FallbackStudy run_fallback_study(const ExperimentConfig& config, const MlpModel& model,
                                 std::span<const double> training_mean_distances = {});

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);
void write_timing_csv(const std::vector<TimingRow>& rows, const std::filesystem::path& path);
/// x,y,series triples (centers, l2_error, strategy[@log_theta]).
void write_plot_data(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);

/// Runs the configured task and writes its CSV files into out_dir. Returns written paths.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config,
                                                  const std::filesystem::path& out_dir);

}  // namespace rbfshape
