#pragma once

#include "rbfshape/point_cloud.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rbfshape {

/// Inverse strict-upper-triangle distances of the sorted cloud, row-major.
/// Length N(N-1)/2.
using FeatureVector = Eigen::VectorXd;

FeatureVector features(const PointCloud& cloud);

inline std::size_t feature_length(std::size_t n) { return n * (n - 1) / 2; }

enum class Activation { ReLU, Linear };

/// MeanFeature divides the features by their mean s before the network and multiplies
/// the output by s. Both features and eps scale like 1/length, so the network sees
/// dimensionless inputs and targets.
enum class InputScaling { None, MeanFeature };

std::string scaling_name(InputScaling s);
InputScaling parse_scaling(const std::string& name);

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::ReLU;
};

class MlpModel {
 public:
  MlpModel() = default;
  /// Throws InvalidModelError on incompatible shapes or a non-linear last layer.
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// Uniform He-scaled weights, zero biases; ReLU on hidden layers, linear output.
  static MlpModel initialized(std::span<const int> dims, std::uint64_t seed);

  /// 45 -> 64 -> 64 -> 64 -> 32 -> 16 -> 1 for ten-point stencils.
  static std::vector<int> standard_dims(int input_dim = 45);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }
  Eigen::Index input_dim() const;
  std::size_t parameter_count() const;

  InputScaling input_scaling() const noexcept { return scaling_; }
  void set_input_scaling(InputScaling s) noexcept { scaling_ = s; }

 private:
  std::vector<DenseLayer> layers_;
  InputScaling scaling_ = InputScaling::None;
};

/// Predicted eps for one feature vector. Throws InvalidModelError on dimension mismatch.
double forward(const MlpModel& model, const FeatureVector& x);

/// Predicted eps for a cloud, applying the model's input scaling.
double predict_eps(const MlpModel& model, const PointCloud& cloud);

/// Column-per-sample batch evaluation.
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct Batch {
  Eigen::MatrixXd inputs;  // in x M, one column per sample
  Eigen::VectorXd labels;  // M
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double loss = 0.0;  // regularized loss at the current parameters
};

/// (1/M) sum (label - F(x))^2 + alpha * sum ||W||_F^2, biases unregularized.
double regularized_loss(const MlpModel& model, const Batch& batch, double l2_alpha);

Gradients backward(const MlpModel& model, const Batch& batch, double l2_alpha);

struct TrainSample {
  FeatureVector x;
  double label;
};

TrainSample make_sample(const PointCloud& cloud, double eps, InputScaling scaling);

struct TrainConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double l2_alpha = 5e-5;
  int batch_size = 64;
  int patience = 200;
  int max_epochs = 20000;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
  std::vector<int> hidden_dims{64, 64, 64, 32, 16};
  InputScaling input_scaling = InputScaling::MeanFeature;  // stamped on the trained model

  void validate() const;
};

struct TrainResult {
  MlpModel model;  // parameters at the best validation loss
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;  // 1-based
  int epochs_run = 0;
};

/// Samples must already be built with config.input_scaling.
/// Mini-batch Adam on the regularized MSE with early stopping on validation MSE.
TrainResult train(std::span<const TrainSample> data, const TrainConfig& config);

/// Writes epoch,train_loss,val_loss.
void write_loss_history(const TrainResult& result, const std::filesystem::path& path);

inline constexpr int kModelFormatVersion = 1;

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

}  // namespace rbfshape
