#include "rbfshape/errors.hpp"
#include "rbfshape/experiments.hpp"

#include "toml.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rbfshape {

namespace {

const std::set<std::string> kKeys = {"task",         "functions", "alpha",          "families", "levels",
                                     "strategies",   "log_theta", "kernel",         "imq_beta", "band",
                                     "stencil_size", "dt",        "t_final",        "timing_repeats",
                                     "seed",         "model",     "training_data",  "output"};

std::string where(const toml::node& n) {
  std::ostringstream s;
  s << " (line " << n.source().begin.line << ")";
  return s.str();
}

double as_number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  if (auto s = n.value<std::string>()) {
    if (*s == "inf") return std::numeric_limits<double>::infinity();
  }
  throw ParseError("config key '" + key + "' must be a number" + where(n));
}

template <class T, class Fn>
std::vector<T> as_list(const toml::node& n, const std::string& key, Fn convert) {
  std::vector<T> out;
  if (const auto* arr = n.as_array()) {
    for (const auto& e : *arr) out.push_back(convert(e));
  } else {
    out.push_back(convert(n));
  }
  if (out.empty()) throw ParseError("config key '" + key + "' is empty" + where(n));
  return out;
}

std::string as_string(const toml::node& n, const std::string& key) {
  if (auto s = n.value<std::string>()) return *s;
  throw ParseError("config key '" + key + "' must be a string" + where(n));
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream s;
    s << "invalid TOML: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ParseError(s.str());
  }
  for (const auto& [k, v] : tbl) {
    if (!kKeys.count(std::string(k.str()))) {
      throw ParseError("unknown config key '" + std::string(k.str()) + "'" + where(v));
    }
  }
  const toml::node* task_node = tbl.get("task");
  if (!task_node) throw ParseError("config is missing 'task'");

  try {
    ExperimentConfig c = ExperimentConfig::defaults(parse_task(as_string(*task_node, "task")));
    auto str = [](const std::string& key) {
      return [key](const toml::node& n) { return as_string(n, key); };
    };
    if (auto* n = tbl.get("functions")) c.functions = as_list<std::string>(*n, "functions", str("functions"));
    if (auto* n = tbl.get("alpha")) c.alpha = as_number(*n, "alpha");
    if (auto* n = tbl.get("families")) {
      c.families = as_list<NodeFamily>(*n, "families", [](const toml::node& e) {
        return parse_family(as_string(e, "families"));
      });
    }
    if (auto* n = tbl.get("levels")) {
      c.levels = as_list<int>(*n, "levels", [](const toml::node& e) {
        if (auto v = e.value<int64_t>()) return static_cast<int>(*v);
        throw ParseError("config key 'levels' must hold integers" + where(e));
      });
    }
    if (auto* n = tbl.get("strategies")) {
      c.strategies = as_list<Strategy>(*n, "strategies", [](const toml::node& e) {
        return parse_strategy(as_string(e, "strategies"));
      });
    }
    if (auto* n = tbl.get("log_theta")) {
      c.log_thetas = as_list<double>(*n, "log_theta", [](const toml::node& e) { return as_number(e, "log_theta"); });
    }
    double beta = 1.0;
    if (auto* n = tbl.get("imq_beta")) beta = as_number(*n, "imq_beta");
    if (auto* n = tbl.get("kernel")) c.kernel = KernelSpec::parse(as_string(*n, "kernel"), beta);
    else c.kernel.imq_beta = beta;
    if (auto* n = tbl.get("band")) {
      const auto ab = as_list<double>(*n, "band", [](const toml::node& e) { return as_number(e, "band"); });
      if (ab.size() != 2) throw ParseError("config key 'band' must be [a, b]" + where(*n));
      c.band = CondBand(ab[0], ab[1]);
    }
    if (auto* n = tbl.get("stencil_size")) c.stencil_size = static_cast<int>(as_number(*n, "stencil_size"));
    if (auto* n = tbl.get("dt")) c.dt = as_number(*n, "dt");
    if (auto* n = tbl.get("t_final")) c.t_final = as_number(*n, "t_final");
    if (auto* n = tbl.get("timing_repeats")) c.timing_repeats = static_cast<int>(as_number(*n, "timing_repeats"));
    if (auto* n = tbl.get("seed")) c.seed = static_cast<std::uint64_t>(as_number(*n, "seed"));
    if (auto* n = tbl.get("model")) c.model_path = as_string(*n, "model");
    if (auto* n = tbl.get("training_data")) c.training_data = as_string(*n, "training_data");
    if (auto* n = tbl.get("output")) c.output = as_string(*n, "output");
    c.validate();
    return c;
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_experiment_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace rbfshape
