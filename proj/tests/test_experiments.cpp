#include "rbfshape/errors.hpp"
#include "rbfshape/experiments.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace rbfshape;

namespace {

const double kPi = std::numbers::pi;

std::filesystem::path temp_dir(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rbfshape_test_" + name);
}

/// CSV lines with the wall-clock `seconds` column blanked.
std::vector<std::string> csv_without_seconds(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string f; std::getline(hs, f, ',');) header.push_back(f);
  const auto col = std::find(header.begin(), header.end(), "seconds") - header.begin();
  std::vector<std::string> out{line};
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string f, kept;
    for (long i = 0; std::getline(ls, f, ','); ++i) kept += (i == col ? std::string("-") : f) + ",";
    out.push_back(kept);
  }
  return out;
}

MlpModel constant_model(double eps, InputScaling scaling) {
  MlpModel m = MlpModel::initialized(MlpModel::standard_dims(), 1);
  for (auto& l : m.mutable_layers()) {
    l.weights.setZero();
    l.bias.setZero();
  }
  m.mutable_layers().back().bias(0) = eps;
  m.set_input_scaling(scaling);
  return m;
}

}  // namespace

TEST(Mesh1d, LevelZeroNodes) {
  const PointCloud eq = make_mesh_1d(0, NodeFamily::Equidistant);
  ASSERT_EQ(eq.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(eq[static_cast<std::size_t>(i)].x(), i / 9.0, 1e-15);

  const PointCloud ch = make_mesh_1d(0, NodeFamily::Chebyshev);
  ASSERT_EQ(ch.size(), 10u);
  for (int k = 0; k < 10; ++k) {
    const double expect = 0.5 * (1.0 - std::cos((2 * k + 1) * kPi / 20.0) / std::cos(kPi / 20.0));
    EXPECT_NEAR(ch[static_cast<std::size_t>(k)].x(), expect, 1e-14) << k;
  }
}

TEST(Mesh1d, RefinementInsertsMidpoints) {
  for (auto fam : {NodeFamily::Equidistant, NodeFamily::Chebyshev}) {
    for (int level = 1; level <= 5; ++level) {
      const PointCloud fine = make_mesh_1d(level, fam);
      const PointCloud coarse = make_mesh_1d(level - 1, fam);
      ASSERT_EQ(fine.size(), 9u * (1u << level) + 1u);
      for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_EQ(fine[2 * i].x(), coarse[i].x());
      for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        EXPECT_DOUBLE_EQ(fine[2 * i + 1].x(), 0.5 * (coarse[i].x() + coarse[i + 1].x()));
      }
    }
  }
  EXPECT_EQ(make_mesh_1d(1, NodeFamily::Equidistant).size(), 19u);
  EXPECT_THROW(make_mesh_1d(-1, NodeFamily::Equidistant), InvalidArgument);
}

TEST(Cluster1d, SharedEndNodes) {
  const auto c19 = cluster_1d(19, 10);
  ASSERT_EQ(c19.size(), 2u);
  EXPECT_EQ(c19[0].back(), 9u);
  EXPECT_EQ(c19[1].front(), 9u);
  EXPECT_EQ(c19[1].back(), 18u);
  EXPECT_EQ(cluster_1d(10, 10).size(), 1u);
  EXPECT_EQ(cluster_1d(37, 10).size(), 4u);
  for (int level = 0; level <= 6; ++level) {
    EXPECT_EQ(cluster_1d(make_mesh_1d(level, NodeFamily::Equidistant).size(), 10).size(), 1u << level);
  }
  EXPECT_THROW(cluster_1d(20, 10), InvalidArgument);
  EXPECT_THROW(cluster_1d(5, 10), InvalidArgument);
}

TEST(Grid2d, BoundaryFlags) {
  std::vector<bool> b;
  const auto pts = grid_2d(4, &b);
  ASSERT_EQ(pts.size(), 16u);
  EXPECT_EQ(std::count(b.begin(), b.end(), true), 12);
  EXPECT_THROW(grid_2d(1), InvalidArgument);
}

TEST(TestFunctions, HandValues) {
  EXPECT_DOUBLE_EQ(test_function("f1").f(Point(0.5, 0)), std::exp(1.0));
  EXPECT_DOUBLE_EQ(test_function("f2").f(Point(0.25, 0)), 0.5);
  EXPECT_EQ(test_function("f3").f(Point(0.25, 0)), 0.0);
  EXPECT_EQ(test_function("f3").f(Point(0.75, 0)), 1.0);
  EXPECT_NEAR(test_function("f5", 0.1).f(Point(0, 0.5)), 0.0, 1e-15);
  EXPECT_EQ(test_function("f4").dim, 2);
  EXPECT_THROW(test_function("f9"), InvalidArgument);
  EXPECT_THROW(test_function("f5", 0.0), InvalidArgument);
}

TEST(HeatU1, SeriesMatchesInitialDataAndDecays) {
  const double t = 1e-6;
  for (double x : {0.1, 0.3, 0.5, 0.8}) {
    // u_t = u_xx = -2 for the initial profile, so u(x, t) ~ x - x^2 - 2t.
    EXPECT_NEAR(heat_u1_exact(x, t, t), x - x * x - 2 * t, 1e-8) << x;
    const double late = 8.0 / std::pow(kPi, 3) * std::sin(kPi * x) * std::exp(-kPi * kPi);
    EXPECT_NEAR(heat_u1_exact(x, 1.0, 1e-3), late, 1e-12);
  }
  EXPECT_NEAR(heat_u1_exact(0.0, 0.1, 1e-3), 0.0, 1e-15);
}

TEST(Names, ParseRoundTrip) {
  for (auto s : {Strategy::Hardy, Strategy::Franke, Strategy::ModFranke, Strategy::Rippa, Strategy::Nn,
                 Strategy::Optimizer}) {
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
  }
  for (auto t : {Task::Interp1d, Task::Interp2d, Task::Heat1d, Task::Heat2d, Task::Poisson2d,
                 Task::FallbackStudy, Task::Timing}) {
    EXPECT_EQ(parse_task(task_name(t)), t);
  }
  EXPECT_EQ(parse_family("chebyshev"), NodeFamily::Chebyshev);
  EXPECT_THROW(parse_strategy("random"), InvalidArgument);
}

TEST(ExperimentConfig, ParsesToml) {
  const ExperimentConfig c = parse_experiment_config(R"(
task = "heat1d"
functions = ["u1", "u2"]
families = ["equidistant", "chebyshev"]
levels = [0, 1, 2]
strategies = ["hardy", "optimizer"]
log_theta = [12, "inf"]
kernel = "gaussian"
band = [10.0, 10.5]
dt = 0.01
t_final = 0.5
seed = 3
output = "heat.csv"
)");
  EXPECT_EQ(c.task, Task::Heat1d);
  EXPECT_EQ(c.functions, (std::vector<std::string>{"u1", "u2"}));
  EXPECT_EQ(c.families.size(), 2u);
  EXPECT_EQ(c.levels, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c.strategies, (std::vector<Strategy>{Strategy::Hardy, Strategy::Optimizer}));
  ASSERT_EQ(c.log_thetas.size(), 2u);
  EXPECT_EQ(c.log_thetas[0], 12.0);
  EXPECT_TRUE(std::isinf(c.log_thetas[1]));
  EXPECT_EQ(c.kernel.family, KernelFamily::Gaussian);
  EXPECT_EQ(c.band.a, 10.0);
  EXPECT_EQ(c.dt, 0.01);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.output, "heat.csv");

  const ExperimentConfig h2 = parse_experiment_config("task = \"heat2d\"\n");
  EXPECT_EQ(h2.dt, 0.005);
  EXPECT_EQ(h2.t_final, 0.5);
  EXPECT_EQ(h2.alpha, 0.01);
}

TEST(ExperimentConfig, ErrorsNameKeyAndLine) {
  auto message = [](const std::string& text) {
    try {
      parse_experiment_config(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string unknown = message("task = \"interp1d\"\nlevelz = [1]\n");
  EXPECT_NE(unknown.find("levelz"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("line 2"), std::string::npos) << unknown;
  const std::string bad = message("task = \"interp1d\"\nlevels = [1,\n");
  EXPECT_NE(bad.find("line"), std::string::npos) << bad;
  EXPECT_NE(message("task = \"interp1d\"\nalpha = \"x\"\n").find("alpha"), std::string::npos);
  EXPECT_NE(message("levels = [1]\n").find("task"), std::string::npos);
  EXPECT_NE(message("task = \"interp1d\"\nlevels = [20]\n").find("level"), std::string::npos);
  EXPECT_NE(message("task = \"interp1d\"\nstrategies = [\"magic\"]\n").find("magic"), std::string::npos);
  EXPECT_NE(message("task = \"interp1d\"\nband = [1.0]\n").find("band"), std::string::npos);
  EXPECT_THROW(load_experiment_config(temp_dir("missing.toml")), ParseError);
}

TEST(Interp1d, OptimizerErrorDropsAndStaysInBand) {
  ExperimentConfig c = ExperimentConfig::defaults(Task::Interp1d);
  c.strategies = {Strategy::Optimizer, Strategy::Hardy};
  const auto rows = run_interp_experiment(c, nullptr);
  ASSERT_EQ(rows.size(), 10u);
  std::vector<double> opt;
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok") << r.strategy << " level " << r.level;
    EXPECT_EQ(r.stencils, 1 << r.level);
    EXPECT_EQ(r.centers, 9u * (1u << r.level) + 1u);
    if (r.strategy == "optimizer") {
      opt.push_back(r.l2_error);
      EXPECT_LE(r.max_logcond, c.band.b + 2e-3);
    }
  }
  ASSERT_EQ(opt.size(), 5u);
  EXPECT_LT(opt.back(), opt.front());
  EXPECT_LT(opt.back(), 1e-4);
}

TEST(Interp1d, FailuresAreRecordedPerCell) {
  ExperimentConfig c = ExperimentConfig::defaults(Task::Interp1d);
  c.levels = {0};
  c.strategies = {Strategy::Nn, Strategy::Hardy};
  const auto rows = run_interp_experiment(c, nullptr);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NE(rows[0].status, "ok");
  EXPECT_EQ(rows[1].status, "ok");
}

TEST(Interp2d, GridRowsComplete) {
  ExperimentConfig c = ExperimentConfig::defaults(Task::Interp2d);
  c.levels = {6, 8};
  c.strategies = {Strategy::Optimizer};
  const auto rows = run_interp_experiment(c, nullptr);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_TRUE(std::isfinite(r.l2_error));
  }
  EXPECT_LT(rows[1].l2_error, rows[0].l2_error);
}

TEST(Heat2d, ZeroDiffusivityFreezesTheState) {
  ExperimentConfig c = ExperimentConfig::defaults(Task::Heat2d);
  c.alpha = 0.0;
  c.levels = {6};
  c.strategies = {Strategy::Optimizer};
  c.t_final = 0.05;
  const auto rows = run_pde_experiment(c, nullptr);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "ok");
  EXPECT_LT(rows[0].l2_error, 1e-14);
}

TEST(Pde, RippaIsRejectedForPdes) {
  ExperimentConfig c = ExperimentConfig::defaults(Task::Poisson2d);
  c.levels = {5};
  c.strategies = {Strategy::Rippa};
  const auto rows = run_pde_experiment(c, nullptr);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NE(rows[0].status.find("rippa"), std::string::npos) << rows[0].status;
  c.task = Task::Interp1d;
  c.levels = {0};
  EXPECT_THROW(run_pde_experiment(c, nullptr), InvalidArgument);
}

TEST(Timing, OneRowPerLevelAndStrategy) {
  ExperimentConfig c = ExperimentConfig::defaults(Task::Timing);
  c.levels = {0, 1};
  c.strategies = {Strategy::Hardy, Strategy::Franke};
  c.timing_repeats = 2;
  const auto rows = run_timing(c, nullptr);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_GT(r.seconds, 0.0);
  EXPECT_EQ(rows[2].centers, 19u);
}

TEST(FallbackStudy, CorrectionsGrowAsThetaDrops) {
  const MlpModel model = constant_model(2.0, InputScaling::MeanFeature);
  ExperimentConfig c = ExperimentConfig::defaults(Task::FallbackStudy);
  c.levels = {0, 1, 2};
  c.log_thetas = {std::numeric_limits<double>::infinity(), 16.0, 8.0};
  const FallbackStudy s = run_fallback_study(c, model);
  ASSERT_EQ(s.rows.size(), 3u * 2u * 3u);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& inf = s.rows[i];
    const auto& t16 = s.rows[i + 6];
    const auto& t8 = s.rows[i + 12];
    EXPECT_EQ(inf.status, "ok");
    EXPECT_EQ(t8.status, "ok");
    EXPECT_LE(inf.corrections, t16.corrections);
    EXPECT_LE(t16.corrections, t8.corrections);
    EXPECT_LE(t8.max_logcond, 8.0);
  }
  EXPECT_EQ(s.report.total, 2 * (1 + 2 + 4));
}

TEST(RunExperiment, DeterministicCsv) {
  const auto dir = temp_dir("bench");
  std::filesystem::remove_all(dir);
  const ExperimentConfig c = parse_experiment_config(R"(
task = "interp1d"
functions = ["f1", "f2"]
levels = [0, 1]
strategies = ["hardy", "optimizer", "rippa"]
output = "interp.csv"
)");
  const auto first = run_experiment(c, dir / "a");
  const auto second = run_experiment(c, dir / "b");
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].filename(), "interp.csv");
  EXPECT_EQ(first[1].filename(), "interp_plot.csv");
  const auto a = csv_without_seconds(first[0]);
  EXPECT_EQ(a, csv_without_seconds(second[0]));
  EXPECT_EQ(a.size(), 1u + 2u * 2u * 3u);
  EXPECT_EQ(a.front(),
            "task,function,family,level,centers,strategy,log_theta,l2_error,max_logcond,corrections,stencils,"
            "seconds,status");
  std::ifstream p1(first[1]), p2(second[1]);
  std::stringstream s1, s2;
  s1 << p1.rdbuf();
  s2 << p2.rdbuf();
  EXPECT_EQ(s1.str(), s2.str());
  std::filesystem::remove_all(dir);
}
