#include "rbfshape/dataset.hpp"

#include "rbfshape/baselines.hpp"
#include "rbfshape/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace rbfshape {

using nlohmann::json;

void GenerationConfig::validate() const {
  if (n < 2) throw InvalidArgument("generation: n must be at least 2");
  if (max_trials <= 0) throw InvalidArgument("generation: max_trials must be positive");
  optimizer.validate();
  for (const auto& c : cells) {
    if (c.dim != 1 && c.dim != 2) throw InvalidArgument("generation: dim must be 1 or 2");
    if (!(c.domain_scale > 0.0) || !std::isfinite(c.domain_scale)) {
      throw InvalidArgument("generation: domain scale must be positive");
    }
    if (c.samples < 0) throw InvalidArgument("generation: negative sample count");
    if (c.parent_points > 0 && (c.parent_points < n || c.parent_clouds <= 0)) {
      throw InvalidArgument("generation: parent clouds need at least n points");
    }
  }
}

namespace {

int scaled(int count, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("generation: scale must be positive");
  return std::max(1, static_cast<int>(std::lround(count * scale)));
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t cell, std::uint64_t kind,
                       std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(kind),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

GenerationConfig GenerationConfig::one_dimensional(double scale) {
  GenerationConfig c;
  const int per = scaled(700, scale);
  const double scales[] = {0.01, 0.1, 1.0};
  for (const char* fn : {"exp_sin", "runge"}) {
    for (double s : scales) c.cells.push_back({1, s, fn, per, 0, 0});
  }
  c.cells.push_back({1, 0.01, "cos_200pi", per, 0, 0});
  c.cells.push_back({1, 0.1, "cos_20pi", per, 0, 0});
  c.cells.push_back({1, 1.0, "cos_2pi", per, 0, 0});
  return c;
}

GenerationConfig GenerationConfig::two_dimensional(double scale) {
  GenerationConfig c;
  const int per_parent = scaled(50, scale);
  for (const char* fn : {"f5_alpha0.1", "f5_alpha1", "franke"}) {
    for (double s : {0.001, 0.01, 0.1, 1.0}) c.cells.push_back({2, s, fn, 20 * per_parent, 20, 20});
  }
  return c;
}

PointCloud sample_cloud(int dim, double lo, double hi, int n, std::mt19937_64& rng) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("sample_cloud: interval must be finite and non-degenerate");
  }
  if (dim != 1 && dim != 2) throw InvalidArgument("sample_cloud: dim must be 1 or 2");
  if (n < 2) throw InvalidArgument("sample_cloud: need at least two points");
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    const double x = u(rng);
    const Point p(x, dim == 2 ? u(rng) : 0.0);
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  }
  return sort_cloud(PointCloud(std::move(pts), dim));
}

LabelOutcome label_cloud(const PointCloud& cloud, const GenerationConfig& config) {
  LabelOutcome out;
  double eps = hardy_shape(cloud);
  while (out.trials < config.max_trials) {
    ++out.trials;
    const OptimizeResult r = optimize_shape(cloud, config.kernel, config.band, eps, config.optimizer);
    eps = r.eps;
    out.eps = r.eps;
    out.logcond = r.achieved_logcond;
    if (r.converged) {
      out.accepted = true;
      break;
    }
  }
  return out;
}

std::optional<DatasetRecord> generate_record(const PointCloud& cloud, const GenerationCell& cell,
                                             const GenerationConfig& config) {
  const LabelOutcome label = label_cloud(cloud, config);
  if (!label.accepted) return std::nullopt;
  return DatasetRecord{sort_cloud(cloud), label.eps, cloud.dim(), cell.domain_scale, cell.generator_fn};
}

int DatasetSummary::accepted() const {
  int n = 0;
  for (const auto& c : cells) n += c.accepted;
  return n;
}

int DatasetSummary::rejected() const {
  int n = 0;
  for (const auto& c : cells) n += c.rejected;
  return n;
}

std::vector<DatasetRecord> generate_records(const GenerationConfig& config, DatasetSummary* summary) {
  config.validate();
  std::vector<DatasetRecord> records;
  DatasetSummary local;
  for (std::size_t ci = 0; ci < config.cells.size(); ++ci) {
    const GenerationCell& cell = config.cells[ci];
    CellSummary cs{cell, 0, 0};

    std::vector<PointCloud> parents;
    for (int p = 0; p < (cell.parent_points > 0 ? cell.parent_clouds : 0); ++p) {
      auto rng = stream(config.seed, ci, 1, static_cast<std::uint64_t>(p));
      parents.push_back(sample_cloud(cell.dim, 0.0, cell.domain_scale, cell.parent_points, rng));
    }

    for (int s = 0; s < cell.samples; ++s) {
      auto rng = stream(config.seed, ci, 0, static_cast<std::uint64_t>(s));
      PointCloud cloud = [&] {
        if (parents.empty()) return sample_cloud(cell.dim, 0.0, cell.domain_scale, config.n, rng);
        const PointCloud& parent = parents[static_cast<std::size_t>(s) % parents.size()];
        std::vector<std::size_t> idx(parent.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(config.n));
        return sort_cloud(parent.subset(idx));
      }();
      if (auto rec = generate_record(cloud, cell, config)) {
        records.push_back(std::move(*rec));
        ++cs.accepted;
      } else {
        ++cs.rejected;
      }
    }
    local.cells.push_back(cs);
  }
  if (summary) *summary = std::move(local);
  return records;
}

DatasetSummary generate_dataset(const GenerationConfig& config, const std::filesystem::path& out) {
  DatasetSummary summary;
  const auto records = generate_records(config, &summary);
  write_records(records, out);
  return summary;
}

std::string record_to_json(const DatasetRecord& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back(r.dim == 1 ? json::array({p.x()}) : json::array({p.x(), p.y()}));
  }
  const json doc = {{"dim", r.dim},
                    {"points", pts},
                    {"eps", r.eps_label},
                    {"domain_scale", r.domain_scale},
                    {"generator_fn", r.generator_fn}};
  return doc.dump();
}

DatasetRecord record_from_json(const std::string& line) {
  try {
    const json doc = json::parse(line);
    const int dim = doc.at("dim").get<int>();
    if (dim != 1 && dim != 2) throw ParseError("record dim must be 1 or 2");
    std::vector<Point> pts;
    for (const auto& jp : doc.at("points")) {
      const auto c = jp.get<std::vector<double>>();
      if (static_cast<int>(c.size()) != dim) throw ParseError("point arity does not match dim");
      pts.emplace_back(c[0], dim == 2 ? c[1] : 0.0);
    }
    const double eps = doc.at("eps").get<double>();
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ParseError("record eps must be positive");
    return DatasetRecord{PointCloud(std::move(pts), dim), eps, dim,
                         doc.at("domain_scale").get<double>(),
                         doc.value("generator_fn", std::string{})};
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what());
  } catch (const DegenerateCloudError& e) {
    throw ParseError(std::string("record has a degenerate cloud: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("record has invalid points: ") + e.what());
  }
}

void write_records(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << record_to_json(r) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<DatasetRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace rbfshape
