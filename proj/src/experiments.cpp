#include "rbfshape/experiments.hpp"

#include "rbfshape/dataset.hpp"
#include "rbfshape/errors.hpp"
#include "rbfshape/interpolation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rbfshape {

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class T, class Names>
T parse_enum(const std::string& name, const Names& names, const char* what) {
  for (const auto& [n, v] : names) {
    if (n == name) return v;
  }
  throw InvalidArgument(std::string("unknown ") + what + " '" + name + "'");
}

template <class T, class Names>
std::string enum_name(T value, const Names& names) {
  for (const auto& [n, v] : names) {
    if (v == value) return n;
  }
  return "?";
}

const std::pair<const char*, NodeFamily> kFamilies[] = {{"equidistant", NodeFamily::Equidistant},
                                                        {"chebyshev", NodeFamily::Chebyshev}};
const std::pair<const char*, Strategy> kStrategies[] = {
    {"hardy", Strategy::Hardy}, {"franke", Strategy::Franke},     {"mod-franke", Strategy::ModFranke},
    {"rippa", Strategy::Rippa}, {"nn", Strategy::Nn},             {"optimizer", Strategy::Optimizer}};
const std::pair<const char*, Task> kTasks[] = {
    {"interp1d", Task::Interp1d},   {"interp2d", Task::Interp2d},   {"heat1d", Task::Heat1d},
    {"heat2d", Task::Heat2d},       {"poisson2d", Task::Poisson2d}, {"fallback-study", Task::FallbackStudy},
    {"timing", Task::Timing}};

}  // namespace

NodeFamily parse_family(const std::string& name) { return parse_enum<NodeFamily>(name, kFamilies, "node family"); }
std::string family_name(NodeFamily f) { return enum_name(f, kFamilies); }
Strategy parse_strategy(const std::string& name) { return parse_enum<Strategy>(name, kStrategies, "strategy"); }
std::string strategy_name(Strategy s) { return enum_name(s, kStrategies); }
Task parse_task(const std::string& name) { return parse_enum<Task>(name, kTasks, "task"); }
std::string task_name(Task t) { return enum_name(t, kTasks); }

PointCloud make_mesh_1d(int level, NodeFamily family) {
  if (level < 0 || level > 16) throw InvalidArgument("make_mesh_1d: level must lie in [0, 16]");
  std::vector<double> xs(10);
  for (int i = 0; i < 10; ++i) {
    xs[static_cast<std::size_t>(i)] =
        family == NodeFamily::Equidistant ? i / 9.0 : std::cos((2.0 * (i + 1) - 1.0) * kPi / 20.0);
  }
  std::sort(xs.begin(), xs.end());
  if (family == NodeFamily::Chebyshev) {
    const double lo = xs.front(), hi = xs.back();
    for (double& x : xs) x = (x - lo) / (hi - lo);
    xs.front() = 0.0;
    xs.back() = 1.0;
  }
  for (int k = 0; k < level; ++k) {
    std::vector<double> refined;
    refined.reserve(2 * xs.size() - 1);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      refined.push_back(xs[i]);
      refined.push_back(0.5 * (xs[i] + xs[i + 1]));
    }
    refined.push_back(xs.back());
    xs = std::move(refined);
  }
  return PointCloud::from_1d(xs);
}

std::vector<std::vector<std::size_t>> cluster_1d(std::size_t count, int n) {
  if (n < 2) throw InvalidArgument("cluster_1d: cluster size must be at least 2");
  const auto step = static_cast<std::size_t>(n - 1);
  if (count < static_cast<std::size_t>(n) || (count - 1) % step != 0) {
    throw InvalidArgument("cluster_1d: " + std::to_string(count) + " nodes cannot be split into clusters of " +
                          std::to_string(n) + " sharing end nodes");
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start + step < count; start += step) {
    std::vector<std::size_t> c(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = start + j;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Point> grid_2d(int side, std::vector<bool>* boundary) {
  if (side < 2) throw InvalidArgument("grid_2d: side must be at least 2");
  std::vector<Point> pts;
  if (boundary) boundary->clear();
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      pts.emplace_back(static_cast<double>(i) / (side - 1), static_cast<double>(j) / (side - 1));
      if (boundary) boundary->push_back(i == 0 || j == 0 || i == side - 1 || j == side - 1);
    }
  }
  return pts;
}

NodeSets oversampled_grid_2d(int side) {
  NodeSets n;
  n.dim = 2;
  n.x = grid_2d(side, &n.x_boundary);
  n.y = grid_2d(2 * side, &n.y_boundary);
  return n;
}

TestFunction test_function(const std::string& name, double alpha) {
  if (name == "f1") return {name, 1, [](const Point& p) { return std::exp(std::sin(kPi * p.x())); }};
  if (name == "f2") return {name, 1, [](const Point& p) { return 1.0 / (1.0 + 16.0 * p.x() * p.x()); }};
  if (name == "f3") return {name, 1, [](const Point& p) { return p.x() > 0.5 ? 1.0 : 0.0; }};
  if (name == "f4") {
    return {name, 2, [](const Point& p) {
              const double x = 9.0 * p.x(), y = 9.0 * p.y();
              return 0.75 * std::exp(-((x - 2) * (x - 2) + (y - 2) * (y - 2)) / 4.0) +
                     0.75 * std::exp(-(x + 1) * (x + 1) / 49.0 - (y + 1) * (y + 1) / 10.0) +
                     0.5 * std::exp(-((x - 7) * (x - 7) + (y - 3) * (y - 3)) / 4.0) -
                     0.2 * std::exp(-(x - 4) * (x - 4) - (y - 7) * (y - 7));
            }};
  }
  if (name == "f5") {
    if (!(alpha > 0.0)) throw InvalidArgument("f5 needs alpha > 0");
    return {name, 2, [alpha](const Point& p) {
              auto g = [alpha](double t) {
                return 1.0 + std::exp(-1.0 / alpha) - std::exp(-t / alpha) - std::exp((t - 1.0) / alpha);
              };
              return g(p.x()) * g(p.y());
            }};
  }
  if (name == "const") return {name, 0, [](const Point&) { return 1.0; }};
  throw InvalidArgument("unknown test function '" + name + "'");
}

double heat_u1_exact(double x, double t, double t_min) {
  const double tm = std::max(t_min, 1e-12);
  double sum = 0.0;
  for (int n = 1;; n += 2) {
    const double c = 8.0 / (std::pow(n * kPi, 3));
    if (c * std::exp(-n * n * kPi * kPi * tm) < 1e-14 && n > 1) break;
    sum += c * std::sin(n * kPi * x) * std::exp(-n * n * kPi * kPi * t);
    if (n > 100001) break;
  }
  return sum;
}

// ---- strategies -------------------------------------------------------------

namespace {

double optimized_shape(const PointCloud& cloud, const ShapeContext& ctx) {
  return optimize_shape(cloud, ctx.kernel, ctx.band, hardy_shape(cloud), ctx.optimizer).eps;
}

FallbackConfig nn_fallback(const ShapeContext& ctx) {
  FallbackConfig fc = ctx.fallback;
  fc.kernel = ctx.kernel;
  fc.band = ctx.band;
  return fc;
}

const MlpModel& require_model(const ShapeContext& ctx) {
  if (!ctx.model) throw InvalidArgument("the nn strategy needs a trained model");
  return *ctx.model;
}

}  // namespace

double shape_only(Strategy s, const PointCloud& cloud, std::span<const double> values,
                  const ShapeContext& ctx) {
  switch (s) {
    case Strategy::Hardy: return hardy_shape(cloud);
    case Strategy::Franke: return franke_shape(cloud);
    case Strategy::ModFranke: return modified_franke_shape(cloud);
    case Strategy::Rippa: return rippa_shape(cloud, values, ctx.kernel, ctx.grid).eps;
    case Strategy::Nn: return predict_shape(require_model(ctx), cloud, nn_fallback(ctx)).eps;
    case Strategy::Optimizer: return optimized_shape(cloud, ctx);
  }
  throw InvalidArgument("unknown strategy");
}

ShapeChoice select_shape(Strategy s, const PointCloud& cloud, std::span<const double> values,
                         const ShapeContext& ctx) {
  ShapeChoice c;
  if (s == Strategy::Nn) {
    const FallbackOutcome o = predict_shape(require_model(ctx), cloud, nn_fallback(ctx));
    c.eps = o.eps;
    c.corrected = o.corrected;
    c.logcond = std::log10(o.achieved_cond);
    return c;
  }
  c.eps = shape_only(s, cloud, values, ctx);
  c.logcond = std::log10(condition_or_inf(cloud, c.eps, ctx.kernel));
  return c;
}

// ---- config -----------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(Task task) {
  ExperimentConfig c;
  c.task = task;
  switch (task) {
    case Task::Interp1d:
      break;
    case Task::Interp2d:
      c.functions = {"f4"};
      c.levels = {10, 15, 20, 25, 30};
      break;
    case Task::Heat1d:
      c.functions = {"u2"};
      c.dt = 0.001;
      c.t_final = 1.0;
      break;
    case Task::Heat2d:
      c.functions = {"heat2d"};
      c.levels = {10, 15, 20, 25, 30};
      c.alpha = 0.01;
      c.dt = 0.005;
      c.t_final = 0.5;
      break;
    case Task::Poisson2d:
      c.functions = {"poisson"};
      c.levels = {10, 15, 20, 25, 30};
      break;
    case Task::FallbackStudy:
      c.functions = {"f1", "f3"};
      c.strategies = {Strategy::Nn};
      c.levels = {0, 1, 2, 3, 4, 5};
      c.log_thetas = {std::numeric_limits<double>::infinity(), 16.0, 12.0};
      break;
    case Task::Timing:
      c.strategies = {Strategy::Hardy, Strategy::Franke, Strategy::ModFranke, Strategy::Rippa, Strategy::Nn};
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (functions.empty()) throw InvalidArgument("experiment: no functions");
  if (families.empty() || levels.empty()) throw InvalidArgument("experiment: need families and levels");
  if (strategies.empty()) throw InvalidArgument("experiment: no strategies");
  if (log_thetas.empty()) throw InvalidArgument("experiment: no thresholds");
  if (stencil_size < 2) throw InvalidArgument("experiment: stencil size must be at least 2");
  if (!(dt > 0.0) || !(t_final >= dt)) throw InvalidArgument("experiment: need dt > 0 and t_final >= dt");
  if (timing_repeats <= 0) throw InvalidArgument("experiment: timing_repeats must be positive");
  const bool two_d = task == Task::Interp2d || task == Task::Heat2d || task == Task::Poisson2d;
  for (int l : levels) {
    if (two_d ? l < 3 : (l < 0 || l > 16)) {
      throw InvalidArgument("experiment: level " + std::to_string(l) + " out of range");
    }
  }
}

// ---- interpolation ----------------------------------------------------------

namespace {

ShapeContext make_context(const ExperimentConfig& config, const MlpModel* model, double log_theta) {
  ShapeContext ctx;
  ctx.kernel = config.kernel;
  ctx.band = config.band;
  ctx.model = model;
  ctx.fallback.theta = FallbackConfig::theta_from_log(log_theta);
  return ctx;
}

struct ClusterFit {
  std::vector<Interpolant> fits;
  double max_logcond = -std::numeric_limits<double>::infinity();
  int corrections = 0;
};

ClusterFit fit_clusters(const PointCloud& mesh, const std::vector<std::vector<std::size_t>>& clusters,
                        const TestFunction& fn, Strategy s, const ShapeContext& ctx,
                        std::vector<PointCloud>* seen = nullptr, std::vector<FallbackOutcome>* outcomes = nullptr) {
  ClusterFit out;
  for (const auto& c : clusters) {
    const PointCloud cloud = mesh.subset(c);
    std::vector<double> values;
    for (const auto& p : cloud) values.push_back(fn.f(p));
    const ShapeChoice choice = select_shape(s, cloud, values, ctx);
    out.max_logcond = std::max(out.max_logcond, choice.logcond);
    out.corrections += choice.corrected ? 1 : 0;
    if (seen) seen->push_back(cloud);
    if (outcomes) outcomes->push_back(FallbackOutcome{choice.eps, choice.corrected ? EpsSource::Optimizer : EpsSource::Nn,
                                                      std::pow(10.0, choice.logcond), choice.corrected, 0.0});
    out.fits.push_back(fit_interpolant(cloud, values, choice.eps, ctx.kernel, false, ResidualCheck::Backward));
  }
  return out;
}

double interp1d_error(const ClusterFit& fit, const TestFunction& fn) {
  constexpr int kQ = 1000;
  std::vector<double> exact, approx;
  // Clusters are consecutive; pick the first whose right end is >= x.
  std::vector<double> right;
  for (const auto& f : fit.fits) right.push_back(f.centers[f.centers.size() - 1].x());
  for (int q = 0; q < kQ; ++q) {
    const double x = static_cast<double>(q) / (kQ - 1);
    auto it = std::lower_bound(right.begin(), right.end(), x);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - right.begin()), right.size() - 1);
    exact.push_back(fn.f(Point(x, 0.0)));
    approx.push_back(eval_interpolant(fit.fits[k], Point(x, 0.0)));
  }
  return l2_error(exact, approx);
}

ConvergenceRow base_row(const ExperimentConfig& config, const std::string& fn, const std::string& family,
                        int level, std::size_t centers, Strategy s, double log_theta) {
  ConvergenceRow r;
  r.task = task_name(config.task);
  r.function = fn;
  r.family = family;
  r.level = level;
  r.centers = centers;
  r.strategy = strategy_name(s);
  r.log_theta = log_theta;
  return r;
}

void finish_row(ConvergenceRow& row, Clock::time_point t0) { row.seconds = seconds_since(t0); }

ConvergenceRow interp1d_row(const ExperimentConfig& config, const std::string& fname, NodeFamily fam, int level,
                            Strategy s, double log_theta, const MlpModel* model,
                            std::vector<PointCloud>* seen = nullptr,
                            std::vector<FallbackOutcome>* outcomes = nullptr) {
  const PointCloud mesh = make_mesh_1d(level, fam);
  ConvergenceRow row = base_row(config, fname, family_name(fam), level, mesh.size(), s, log_theta);
  const auto t0 = Clock::now();
  try {
    const TestFunction fn = test_function(fname, config.alpha);
    const auto clusters = cluster_1d(mesh.size(), config.stencil_size);
    const ShapeContext ctx = make_context(config, model, log_theta);
    const ClusterFit fit = fit_clusters(mesh, clusters, fn, s, ctx, seen, outcomes);
    row.stencils = static_cast<int>(clusters.size());
    row.max_logcond = fit.max_logcond;
    row.corrections = fit.corrections;
    row.l2_error = interp1d_error(fit, fn);
  } catch (const std::exception& e) {
    row.status = e.what();
  }
  finish_row(row, t0);
  return row;
}

/// Per-stencil shapes on an RBF-FD node set; values (for Rippa) come from `data`.
void assign_stencil_shapes(const NodeSets& nodes, StencilSet& st, Strategy s, const ShapeContext& ctx,
                           const std::function<double(const Point&)>* data, ConvergenceRow& row) {
  row.max_logcond = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < st.stencils.size(); ++i) {
    const PointCloud cloud = stencil_cloud(nodes, st.stencils[i]);
    std::vector<double> values;
    if (s == Strategy::Rippa) {
      if (!data) throw InvalidArgument("rippa needs known data and is only available for interpolation");
      for (const auto& p : cloud) values.push_back((*data)(p));
    }
    const ShapeChoice c = select_shape(s, cloud, values, ctx);
    st.eps[i] = c.eps;
    row.max_logcond = std::max(row.max_logcond, c.logcond);
    row.corrections += c.corrected ? 1 : 0;
  }
  row.stencils = static_cast<int>(st.stencils.size());
}

ConvergenceRow interp2d_row(const ExperimentConfig& config, const std::string& fname, int side, Strategy s,
                            double log_theta, const MlpModel* model) {
  const NodeSets nodes = oversampled_grid_2d(side);
  ConvergenceRow row = base_row(config, fname, "grid", side, nodes.x.size(), s, log_theta);
  const auto t0 = Clock::now();
  try {
    const TestFunction fn = test_function(fname, config.alpha);
    StencilSet st = make_stencil_set(nodes, config.stencil_size);
    assign_stencil_shapes(nodes, st, s, make_context(config, model, log_theta), &fn.f, row);
    const SparseRowMatrix g = assemble_global(nodes, st, config.kernel, DiffOp::Identity);
    Eigen::VectorXd fx(static_cast<Eigen::Index>(nodes.x.size()));
    for (std::size_t i = 0; i < nodes.x.size(); ++i) fx(static_cast<Eigen::Index>(i)) = fn.f(nodes.x[i]);
    const Eigen::VectorXd approx = g * fx;
    std::vector<double> exact;
    for (const auto& y : nodes.y) exact.push_back(fn.f(y));
    row.l2_error = l2_error(exact, std::span<const double>(approx.data(), static_cast<std::size_t>(approx.size())));
  } catch (const std::exception& e) {
    row.status = e.what();
  }
  finish_row(row, t0);
  return row;
}

}  // namespace

std::vector<ConvergenceRow> run_interp_experiment(const ExperimentConfig& config, const MlpModel* model) {
  config.validate();
  std::vector<ConvergenceRow> rows;
  for (const auto& fname : config.functions) {
    for (double lt : config.log_thetas) {
      for (Strategy s : config.strategies) {
        if (config.task == Task::Interp2d) {
          for (int side : config.levels) rows.push_back(interp2d_row(config, fname, side, s, lt, model));
          continue;
        }
        for (NodeFamily fam : config.families) {
          for (int level : config.levels) rows.push_back(interp1d_row(config, fname, fam, level, s, lt, model));
        }
      }
    }
  }
  return rows;
}

// ---- PDEs -------------------------------------------------------------------

namespace {

NodeSets mesh_1d_nodes(const PointCloud& mesh) {
  std::vector<bool> boundary(mesh.size(), false);
  boundary.front() = true;
  boundary.back() = true;
  return NodeSets::collocation(1, mesh.points(), boundary);
}

NodeSets grid_nodes(int side) {
  std::vector<bool> boundary;
  std::vector<Point> x = grid_2d(side, &boundary);
  return NodeSets::collocation(2, std::move(x), std::move(boundary));
}

double nodal_error(const NodeSets& nodes, const Eigen::VectorXd& u, const std::function<double(const Point&)>& exact) {
  std::vector<double> e;
  for (const auto& p : nodes.x) e.push_back(exact(p));
  return l2_error(e, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
}

ConvergenceRow pde_row(const ExperimentConfig& config, const std::string& fname, NodeFamily fam, int level,
                       Strategy s, double log_theta, const MlpModel* model) {
  const bool one_d = config.task == Task::Heat1d;
  const NodeSets nodes = one_d ? mesh_1d_nodes(make_mesh_1d(level, fam)) : grid_nodes(level);
  ConvergenceRow row = base_row(config, fname, one_d ? family_name(fam) : "grid", level, nodes.x.size(), s, log_theta);
  const auto t0 = Clock::now();
  try {
    StencilSet st = make_stencil_set(nodes, config.stencil_size);
    assign_stencil_shapes(nodes, st, s, make_context(config, model, log_theta), nullptr, row);
    const SparseRowMatrix lap = assemble_global(nodes, st, config.kernel, DiffOp::Laplacian);
    const auto m = static_cast<Eigen::Index>(nodes.x.size());

    if (config.task == Task::Poisson2d) {
      auto exact = [](const Point& p) { return std::sin(2.0 * kPi * p.x() * p.y()); };
      auto f = [](const Point& p) {
        return -4.0 * kPi * kPi * std::sin(2.0 * kPi * p.x() * p.y()) * (p.x() * p.x() + p.y() * p.y());
      };
      row.l2_error = nodal_error(nodes, solve_poisson(nodes, lap, f, exact), exact);
    } else {
      std::function<double(const Point&, double)> exact;
      double alpha = 1.0;
      if (config.task == Task::Heat2d) {
        alpha = config.alpha;
        exact = [alpha](const Point& p, double t) {
          return std::sin(kPi * p.x()) * std::sin(kPi * p.y()) * std::exp(-2.0 * alpha * kPi * kPi * t);
        };
      } else if (fname == "u2") {
        exact = [](const Point& p, double t) { return 6.0 * std::sin(kPi * p.x()) * std::exp(-kPi * kPi * t); };
      } else if (fname == "u1") {
        const double tmin = config.dt;
        exact = [tmin](const Point& p, double t) {
          return t == 0.0 ? p.x() - p.x() * p.x() : heat_u1_exact(p.x(), t, tmin);
        };
      } else {
        throw InvalidArgument("heat1d supports u1 and u2, not '" + fname + "'");
      }
      Eigen::VectorXd u0(m);
      for (Eigen::Index i = 0; i < m; ++i) u0(i) = exact(nodes.x[static_cast<std::size_t>(i)], 0.0);
      const Trajectory tr = bdf2_heat(nodes, lap, config.dt, config.t_final, alpha, u0,
                                      [](const Point&, double) { return 0.0; });
      const double tf = tr.times.back();
      row.l2_error = nodal_error(nodes, tr.final_state, [&](const Point& p) { return exact(p, tf); });
    }
  } catch (const std::exception& e) {
    row.status = e.what();
  }
  finish_row(row, t0);
  return row;
}

}  // namespace

std::vector<ConvergenceRow> run_pde_experiment(const ExperimentConfig& config, const MlpModel* model) {
  config.validate();
  if (config.task != Task::Heat1d && config.task != Task::Heat2d && config.task != Task::Poisson2d) {
    throw InvalidArgument("run_pde_experiment: task must be heat1d, heat2d or poisson2d");
  }
  std::vector<ConvergenceRow> rows;
  const std::vector<NodeFamily> grid_only{NodeFamily::Equidistant};
  const auto& families = config.task == Task::Heat1d ? config.families : grid_only;
  for (const auto& fname : config.functions) {
    for (double lt : config.log_thetas) {
      for (Strategy s : config.strategies) {
        for (NodeFamily fam : families) {
          for (int level : config.levels) rows.push_back(pde_row(config, fname, fam, level, s, lt, model));
        }
      }
    }
  }
  return rows;
}

// ---- timing -----------------------------------------------------------------

std::vector<TimingRow> run_timing(const ExperimentConfig& config, const MlpModel* model) {
  config.validate();
  std::vector<TimingRow> rows;
  const TestFunction fn = test_function(config.functions.front(), config.alpha);
  const ShapeContext ctx = make_context(config, model, config.log_thetas.front());
  for (int level : config.levels) {
    const PointCloud mesh = make_mesh_1d(level, config.families.front());
    std::vector<PointCloud> clouds;
    std::vector<std::vector<double>> values;
    for (const auto& c : cluster_1d(mesh.size(), config.stencil_size)) {
      clouds.push_back(mesh.subset(c));
      values.emplace_back();
      for (const auto& p : clouds.back()) values.back().push_back(fn.f(p));
    }
    for (Strategy s : config.strategies) {
      volatile double sink = 0.0;
      auto pass = [&] {
        for (std::size_t i = 0; i < clouds.size(); ++i) sink = sink + shape_only(s, clouds[i], values[i], ctx);
      };
      // Repeat cheap passes so each sample spans at least a millisecond.
      auto t0 = Clock::now();
      pass();
      const double once = std::max(seconds_since(t0), 1e-9);
      const int inner = std::clamp(static_cast<int>(1e-3 / once), 1, 100000);
      std::vector<double> samples;
      for (int r = 0; r < config.timing_repeats; ++r) {
        t0 = Clock::now();
        for (int k = 0; k < inner; ++k) pass();
        samples.push_back(seconds_since(t0) / inner);
      }
      std::nth_element(samples.begin(), samples.begin() + static_cast<long>(samples.size() / 2), samples.end());
      rows.push_back({mesh.size(), strategy_name(s), samples[samples.size() / 2]});
    }
  }
  return rows;
}

// ---- fallback study ---------------------------------------------------------

FallbackStudy run_fallback_study(const ExperimentConfig& config, const MlpModel& model,
                                 std::span<const double> training_mean_distances) {
  config.validate();
  FallbackStudy study;
  double lowest = std::numeric_limits<double>::infinity();
  for (double lt : config.log_thetas) lowest = std::min(lowest, lt);
  std::vector<PointCloud> seen;
  std::vector<FallbackOutcome> outcomes;
  for (double lt : config.log_thetas) {
    const bool keep = lt == lowest;
    for (const auto& fname : config.functions) {
      for (NodeFamily fam : config.families) {
        for (int level : config.levels) {
          study.rows.push_back(interp1d_row(config, fname, fam, level, Strategy::Nn, lt, &model,
                                            keep ? &seen : nullptr, keep ? &outcomes : nullptr));
        }
      }
    }
  }
  study.report = fallback_report(seen, outcomes, training_mean_distances);
  return study;
}

// ---- output -----------------------------------------------------------------

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(10);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

}  // namespace

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "task,function,family,level,centers,strategy,log_theta,l2_error,max_logcond,corrections,stencils,"
         "seconds,status\n";
  for (const auto& r : rows) {
    out << r.task << ',' << r.function << ',' << r.family << ',' << r.level << ',' << r.centers << ','
        << r.strategy << ',' << r.log_theta << ',' << r.l2_error << ',' << r.max_logcond << ',' << r.corrections
        << ',' << r.stencils << ',' << r.seconds << ',' << csv_field(r.status) << '\n';
  }
}

void write_timing_csv(const std::vector<TimingRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "centers,strategy,seconds\n";
  for (const auto& r : rows) out << r.centers << ',' << r.strategy << ',' << r.seconds << '\n';
}

void write_plot_data(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "x,y,series\n";
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    std::ostringstream series;
    series << r.function << '/' << r.family << '/' << r.strategy;
    if (!std::isinf(r.log_theta)) series << "@theta=1e" << r.log_theta;
    out << r.centers << ',' << r.l2_error << ',' << series.str() << '\n';
  }
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config,
                                                  const std::filesystem::path& out_dir) {
  config.validate();
  std::optional<MlpModel> model;
  if (!config.model_path.empty()) model = load_model(config.model_path);
  const MlpModel* mp = model ? &*model : nullptr;

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path csv = out_dir / config.output;
  const std::filesystem::path stem = out_dir / std::filesystem::path(config.output).stem();
  std::vector<std::filesystem::path> written;
  auto plot_path = [&] { return std::filesystem::path(stem.string() + "_plot.csv"); };

  switch (config.task) {
    case Task::Interp1d:
    case Task::Interp2d: {
      const auto rows = run_interp_experiment(config, mp);
      write_convergence_csv(rows, csv);
      write_plot_data(rows, plot_path());
      written = {csv, plot_path()};
      break;
    }
    case Task::Heat1d:
    case Task::Heat2d:
    case Task::Poisson2d: {
      const auto rows = run_pde_experiment(config, mp);
      write_convergence_csv(rows, csv);
      write_plot_data(rows, plot_path());
      written = {csv, plot_path()};
      break;
    }
    case Task::Timing: {
      write_timing_csv(run_timing(config, mp), csv);
      written = {csv};
      break;
    }
    case Task::FallbackStudy: {
      if (!mp) throw InvalidArgument("fallback-study needs `model`");
      std::vector<double> train_d;
      if (!config.training_data.empty()) {
        for (const auto& r : read_records(config.training_data)) train_d.push_back(mean_pairwise_distance(r.points));
      }
      const FallbackStudy study = run_fallback_study(config, *mp, train_d);
      write_convergence_csv(study.rows, csv);
      write_plot_data(study.rows, plot_path());
      const std::filesystem::path hist(stem.string() + "_hist.csv");
      write_histogram_csv(study.report, hist);
      written = {csv, plot_path(), hist};
      break;
    }
  }
  return written;
}

}  // namespace rbfshape
