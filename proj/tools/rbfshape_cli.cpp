#include "rbfshape/conditioning.hpp"
#include "rbfshape/dataset.hpp"
#include "rbfshape/errors.hpp"
#include "rbfshape/experiments.hpp"
#include "rbfshape/fallback.hpp"
#include "rbfshape/neural.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace rbfshape;

namespace {

// One point per line, one or two columns separated by whitespace or commas; '#' starts a comment.
PointCloud read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open points file " + path);
  std::vector<Point> pts;
  int dim = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = line.substr(0, line.find('#'));
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof()) throw ParseError(path + ":" + std::to_string(lineno) + ": not a number");
    if (v.empty()) continue;
    if (v.size() > 2) throw ParseError(path + ":" + std::to_string(lineno) + ": expected 1 or 2 columns");
    if (dim == 0) dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != dim) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": column count changed");
    }
    pts.emplace_back(v[0], dim == 2 ? v[1] : 0.0);
  }
  return PointCloud(std::move(pts), dim == 0 ? 1 : dim);
}

void print_summary(const DatasetSummary& s) {
  std::printf("dim,domain_scale,generator_fn,accepted,rejected\n");
  for (const auto& c : s.cells) {
    std::printf("%d,%g,%s,%d,%d\n", c.cell.dim, c.cell.domain_scale, c.cell.generator_fn.c_str(), c.accepted,
                c.rejected);
  }
  std::printf("total,,,%d,%d\n", s.accepted(), s.rejected());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condition-controlled RBF shape parameter selection"};
  app.require_subcommand(1);

  // dataset generate
  auto* dataset = app.add_subcommand("dataset", "Training data generation");
  dataset->require_subcommand(1);
  auto* gen = dataset->add_subcommand("generate", "Label random clouds with condition-banded eps (JSON lines)");
  int gen_dim = 1;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  double gen_scale = 1.0;
  std::string gen_kernel = "imq";
  gen->add_option("--dim", gen_dim, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  gen->add_option("--out", gen_out, "Output JSONL file")->required();
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--scale", gen_scale, "Fraction of the full per-cell sample counts")->check(CLI::PositiveNumber);
  gen->add_option("--kernel", gen_kernel, "imq or gaussian");

  // nn train / predict
  auto* nn = app.add_subcommand("nn", "Neural shape predictor");
  nn->require_subcommand(1);
  auto* tr = nn->add_subcommand("train", "Train the MLP on one or more JSONL datasets");
  std::vector<std::string> tr_data;
  std::string tr_out, tr_history, tr_scaling = "mean_feature";
  TrainConfig tc;
  tr->add_option("--data", tr_data, "Dataset file (repeatable)")->required();
  tr->add_option("--out", tr_out, "Model file")->required();
  tr->add_option("--seed", tc.seed, "Seed for split, shuffling and init");
  tr->add_option("--history", tr_history, "Write epoch,train_loss,val_loss CSV");
  tr->add_option("--max-epochs", tc.max_epochs);
  tr->add_option("--patience", tc.patience);
  tr->add_option("--lr", tc.learning_rate);
  tr->add_option("--scaling", tr_scaling, "mean_feature or none");

  auto* pr = nn->add_subcommand("predict", "Raw network prediction for one cloud");
  std::string pr_model, pr_points;
  pr->add_option("--model", pr_model)->required();
  pr->add_option("--points", pr_points)->required();

  // predict with fallback
  auto* fb = app.add_subcommand("predict", "Predict eps with the condition-threshold fallback");
  std::string fb_model, fb_points;
  double fb_theta = std::numeric_limits<double>::infinity();
  bool fb_log = false;
  fb->add_option("--model", fb_model)->required();
  fb->add_option("--points", fb_points)->required();
  fb->add_option("--theta", fb_theta, "Condition threshold (default inf)");
  fb->add_flag("--log-theta", fb_log, "Interpret --theta as log10");

  // bench run
  auto* bench = app.add_subcommand("bench", "Experiments");
  bench->require_subcommand(1);
  auto* run = bench->add_subcommand("run", "Run an experiment described by a TOML file");
  std::string run_config, run_out = "results";
  run->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      GenerationConfig cfg = gen_dim == 1 ? GenerationConfig::one_dimensional(gen_scale)
                                          : GenerationConfig::two_dimensional(gen_scale);
      cfg.seed = gen_seed;
      cfg.kernel = KernelSpec::parse(gen_kernel);
      print_summary(generate_dataset(cfg, gen_out));
    } else if (*tr) {
      tc.input_scaling = parse_scaling(tr_scaling);
      std::vector<TrainSample> samples;
      for (const auto& f : tr_data) {
        for (const auto& r : read_records(f)) samples.push_back(make_sample(r.points, r.eps_label, tc.input_scaling));
      }
      const TrainResult res = train(samples, tc);
      save_model(res.model, tr_out);
      if (!tr_history.empty()) write_loss_history(res, tr_history);
      std::printf("samples %zu epochs %d best_epoch %d val_mse_first %.6g val_mse_best %.6g\n", samples.size(),
                  res.epochs_run, res.best_epoch, res.val_loss.front(),
                  res.val_loss[static_cast<std::size_t>(res.best_epoch - 1)]);
    } else if (*pr) {
      const MlpModel model = load_model(pr_model);
      const PointCloud cloud = read_points(pr_points);
      const double eps = predict_eps(model, cloud);
      const double c = eps > 0 && std::isfinite(eps) ? condition_or_inf(cloud, eps, KernelSpec{}) : NAN;
      std::printf("eps %.17g\nlog10_cond %.6f\n", eps, std::log10(c));
    } else if (*fb) {
      FallbackConfig cfg;
      cfg.theta = fb_log ? FallbackConfig::theta_from_log(fb_theta) : fb_theta;
      const FallbackOutcome o = predict_shape(load_model(fb_model), read_points(fb_points), cfg);
      std::printf("eps %.17g\nsource %s\ncorrected %s\nlog10_cond %.6f\nnn_eps %.17g\n", o.eps,
                  o.source == EpsSource::Nn ? "nn" : "optimizer", o.corrected ? "true" : "false",
                  std::log10(o.achieved_cond), o.nn_eps);
    } else if (*run) {
      for (const auto& p : run_experiment(load_experiment_config(run_config), run_out)) {
        std::printf("wrote %s\n", p.string().c_str());
      }
    }
  } catch (const GuaranteeViolationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
