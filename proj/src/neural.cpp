#include "rbfshape/neural.hpp"

#include "rbfshape/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace rbfshape {

using nlohmann::json;

FeatureVector features(const PointCloud& cloud) {
  const PointCloud sorted = sort_cloud(cloud);
  const std::size_t n = sorted.size();
  FeatureVector out(static_cast<Eigen::Index>(feature_length(n)));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (sorted[i] - sorted[j]).norm();
      if (!(d > 0.0)) throw DegenerateCloudError("features: duplicate points");
      out(k++) = 1.0 / d;
    }
  }
  return out;
}

std::string activation_name(Activation a) { return a == Activation::ReLU ? "relu" : "linear"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "linear") return Activation::Linear;
  throw InvalidModelError("unknown activation '" + name + "'");
}

std::string scaling_name(InputScaling s) { return s == InputScaling::None ? "none" : "mean_feature"; }

InputScaling parse_scaling(const std::string& name) {
  if (name == "none") return InputScaling::None;
  if (name == "mean_feature") return InputScaling::MeanFeature;
  throw InvalidModelError("unknown input scaling '" + name + "'");
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidModelError("model has no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.rows() == 0 || layer.weights.cols() == 0) {
      throw InvalidModelError("layer " + std::to_string(l) + " has an empty weight matrix");
    }
    if (layer.bias.size() != layer.weights.rows()) {
      throw InvalidModelError("layer " + std::to_string(l) + " bias length does not match");
    }
    if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
      throw InvalidModelError("layer " + std::to_string(l) + " input size " +
                              std::to_string(layer.weights.cols()) + " does not match previous output " +
                              std::to_string(layers_[l - 1].weights.rows()));
    }
  }
  if (layers_.back().activation != Activation::Linear || layers_.back().weights.rows() != 1) {
    throw InvalidModelError("last layer must be linear with a single output");
  }
}

std::vector<int> MlpModel::standard_dims(int input_dim) { return {input_dim, 64, 64, 64, 32, 16, 1}; }

MlpModel MlpModel::initialized(std::span<const int> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidModelError("need at least input and output dimensions");
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 1; l < dims.size(); ++l) {
    const int fan_in = dims[l - 1];
    const int fan_out = dims[l];
    if (fan_in <= 0 || fan_out <= 0) throw InvalidModelError("layer dimensions must be positive");
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = dist(rng);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = l + 1 == dims.size() ? Activation::Linear : Activation::ReLU;
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

Eigen::Index MlpModel::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().weights.cols();
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

namespace {

void apply_activation(Activation a, Eigen::MatrixXd& z) {
  if (a == Activation::ReLU) z = z.cwiseMax(0.0);
}

void check_input(const MlpModel& model, Eigen::Index rows) {
  if (model.layers().empty()) throw InvalidModelError("model has no layers");
  if (rows != model.input_dim()) {
    throw InvalidModelError("feature length " + std::to_string(rows) + " does not match model input " +
                            std::to_string(model.input_dim()));
  }
}

/// Keeps pre-activations and activations for the backward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // a_0 = input, a_l for each layer
  std::vector<Eigen::MatrixXd> preacts;
};

ForwardCache forward_cached(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  ForwardCache cache;
  cache.activations.reserve(model.layers().size() + 1);
  cache.preacts.reserve(model.layers().size());
  cache.activations.push_back(inputs);
  for (const auto& layer : model.layers()) {
    Eigen::MatrixXd z = layer.weights * cache.activations.back();
    z.colwise() += layer.bias;
    cache.preacts.push_back(z);
    apply_activation(layer.activation, z);
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

double l2_penalty(const MlpModel& model, double alpha) {
  if (alpha == 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& l : model.layers()) acc += l.weights.squaredNorm();
  return alpha * acc;
}

}  // namespace

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  check_input(model, inputs.rows());
  Eigen::MatrixXd a = inputs;
  for (const auto& layer : model.layers()) {
    Eigen::MatrixXd z = layer.weights * a;
    z.colwise() += layer.bias;
    apply_activation(layer.activation, z);
    a = std::move(z);
  }
  return a.row(0).transpose();
}

double forward(const MlpModel& model, const FeatureVector& x) {
  return forward_batch(model, x)(0);
}

namespace {

double feature_scale(const FeatureVector& f, InputScaling scaling) {
  return scaling == InputScaling::MeanFeature ? f.mean() : 1.0;
}

}  // namespace

double predict_eps(const MlpModel& model, const PointCloud& cloud) {
  const FeatureVector f = features(cloud);
  const double s = feature_scale(f, model.input_scaling());
  return s * forward(model, f / s);
}

TrainSample make_sample(const PointCloud& cloud, double eps, InputScaling scaling) {
  const FeatureVector f = features(cloud);
  const double s = feature_scale(f, scaling);
  return {f / s, eps / s};
}

double regularized_loss(const MlpModel& model, const Batch& batch, double l2_alpha) {
  const Eigen::VectorXd pred = forward_batch(model, batch.inputs);
  return (pred - batch.labels).squaredNorm() / static_cast<double>(batch.labels.size()) +
         l2_penalty(model, l2_alpha);
}

Gradients backward(const MlpModel& model, const Batch& batch, double l2_alpha) {
  check_input(model, batch.inputs.rows());
  const Eigen::Index m = batch.inputs.cols();
  if (m == 0 || batch.labels.size() != m) {
    throw InvalidArgument("backward: batch must be non-empty with one label per column");
  }
  const ForwardCache cache = forward_cached(model, batch.inputs);
  const auto& layers = model.layers();
  const std::size_t depth = layers.size();

  Gradients g;
  g.weights.resize(depth);
  g.biases.resize(depth);
  const Eigen::RowVectorXd residual = cache.activations.back().row(0) - batch.labels.transpose();
  g.loss = residual.squaredNorm() / static_cast<double>(m) + l2_penalty(model, l2_alpha);

  // delta = dLoss / dz for the current layer, one column per sample.
  Eigen::MatrixXd delta = (2.0 / static_cast<double>(m)) * residual;
  for (std::size_t l = depth; l-- > 0;) {
    if (layers[l].activation == Activation::ReLU) {
      delta = delta.cwiseProduct((cache.preacts[l].array() > 0.0).cast<double>().matrix());
    }
    g.weights[l] = delta * cache.activations[l].transpose() + 2.0 * l2_alpha * layers[l].weights;
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = layers[l].weights.transpose() * delta;
  }
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !(l2_alpha >= 0.0) || !(adam_epsilon > 0.0)) {
    throw InvalidArgument("train: learning rate and epsilon must be positive, alpha non-negative");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InvalidArgument("train: Adam betas must lie in (0, 1)");
  }
  if (batch_size <= 0 || patience < 0 || max_epochs <= 0) {
    throw InvalidArgument("train: batch size and max epochs must be positive, patience >= 0");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidArgument("train: validation fraction must lie in (0, 1)");
  }
}

namespace {

Batch gather(std::span<const TrainSample> data, std::span<const std::size_t> idx) {
  Batch b;
  const Eigen::Index in = data[idx[0]].x.size();
  b.inputs.resize(in, static_cast<Eigen::Index>(idx.size()));
  b.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& s = data[idx[k]];
    if (s.x.size() != in) throw InvalidArgument("train: inconsistent feature lengths");
    b.inputs.col(static_cast<Eigen::Index>(k)) = s.x;
    b.labels(static_cast<Eigen::Index>(k)) = s.label;
  }
  return b;
}

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const MlpModel& model) {
    for (const auto& l : model.layers()) {
      mw.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      vw.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      mb.push_back(Eigen::VectorXd::Zero(l.bias.size()));
      vb.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
  }

  void apply(MlpModel& model, const Gradients& g, const TrainConfig& c) {
    ++step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
    auto& layers = model.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      mw[l] = c.beta1 * mw[l] + (1.0 - c.beta1) * g.weights[l];
      vw[l] = c.beta2 * vw[l] + (1.0 - c.beta2) * g.weights[l].cwiseAbs2();
      layers[l].weights.array() -=
          c.learning_rate * (mw[l].array() / bc1) / ((vw[l].array() / bc2).sqrt() + c.adam_epsilon);
      mb[l] = c.beta1 * mb[l] + (1.0 - c.beta1) * g.biases[l];
      vb[l] = c.beta2 * vb[l] + (1.0 - c.beta2) * g.biases[l].cwiseAbs2();
      layers[l].bias.array() -=
          c.learning_rate * (mb[l].array() / bc1) / ((vb[l].array() / bc2).sqrt() + c.adam_epsilon);
    }
  }
};

}  // namespace

TrainResult train(std::span<const TrainSample> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw InvalidArgument("train: empty dataset");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::llround(config.validation_fraction * static_cast<double>(data.size())));
  if (n_val == 0 || n_val >= data.size()) {
    throw InvalidArgument("train: dataset of " + std::to_string(data.size()) +
                          " samples leaves an empty train or validation split");
  }
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<long>(n_val));
  const std::vector<std::size_t> val_idx(order.end() - static_cast<long>(n_val), order.end());
  const Batch val = gather(data, val_idx);

  std::vector<int> dims;
  dims.push_back(static_cast<int>(data[0].x.size()));
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(1);

  TrainResult result;
  MlpModel model = MlpModel::initialized(dims, rng());
  model.set_input_scaling(config.input_scaling);
  AdamState adam(model);
  double best_val = std::numeric_limits<double>::infinity();
  result.model = model;
  int wait = 0;

  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double sq_sum = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += batch) {
      const std::size_t len = std::min(batch, train_idx.size() - start);
      const Batch b = gather(data, std::span(train_idx).subspan(start, len));
      const Gradients g = backward(model, b, config.l2_alpha);
      sq_sum += (g.loss - l2_penalty(model, config.l2_alpha)) * static_cast<double>(len);
      adam.apply(model, g, config);
    }
    result.train_loss.push_back(sq_sum / static_cast<double>(train_idx.size()));
    const double val_mse = regularized_loss(model, val, 0.0);
    result.val_loss.push_back(val_mse);
    result.epochs_run = epoch;

    if (val_mse < best_val) {
      best_val = val_mse;
      result.model = model;
      result.best_epoch = epoch;
      wait = 0;
    } else if (++wait > config.patience || !std::isfinite(val_mse)) {
      break;
    }
  }
  return result;
}

void write_loss_history(const TrainResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,val_loss\n";
  out.precision(17);
  for (std::size_t i = 0; i < result.train_loss.size(); ++i) {
    out << i + 1 << ',' << result.train_loss[i] << ',' << result.val_loss[i] << '\n';
  }
}

std::string model_to_json(const MlpModel& model) {
  json layers = json::array();
  for (const auto& l : model.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) w.push_back(l.weights(i, j));
    }
    layers.push_back({{"in", l.weights.cols()},
                      {"out", l.weights.rows()},
                      {"activation", activation_name(l.activation)},
                      {"weights", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  json doc = {{"format", "rbfshape-mlp"},
              {"version", kModelFormatVersion},
              {"input_scaling", scaling_name(model.input_scaling())},
              {"layers", layers}};
  return doc.dump();
}

MlpModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "rbfshape-mlp") {
      throw ParseError("model file has unexpected format tag");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw UnsupportedVersionError("unsupported model format version " + std::to_string(version) +
                                    " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    std::vector<DenseLayer> layers;
    for (const auto& jl : doc.at("layers")) {
      const auto in = jl.at("in").get<Eigen::Index>();
      const auto out = jl.at("out").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (in <= 0 || out <= 0 || static_cast<Eigen::Index>(w.size()) != in * out ||
          static_cast<Eigen::Index>(b.size()) != out) {
        throw ParseError("model layer has inconsistent shape");
      }
      DenseLayer layer;
      layer.weights.resize(out, in);
      for (Eigen::Index i = 0; i < out; ++i) {
        for (Eigen::Index j = 0; j < in; ++j) layer.weights(i, j) = w[static_cast<std::size_t>(i * in + j)];
      }
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), out);
      layer.activation = parse_activation(jl.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    MlpModel model(std::move(layers));
    model.set_input_scaling(parse_scaling(doc.at("input_scaling").get<std::string>()));
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is malformed: ") + e.what());
  } catch (const InvalidModelError& e) {
    throw ParseError(std::string("model file describes an invalid model: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << model_to_json(model) << '\n';
  if (!out) throw std::runtime_error("failed writing model to " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return model_from_json(ss.str());
  } catch (const UnsupportedVersionError& e) {
    throw UnsupportedVersionError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace rbfshape
