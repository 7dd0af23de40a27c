#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dlpa/metrics.hpp"

namespace dlpa {

enum class LossKind { kMse, kMae };

/// Fully connected network: three ReLU hidden layers, sigmoid output.
/// weights[i] maps layer i activations (size dims[i]) to dims[i+1].
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // 4 matrices
  std::vector<Eigen::VectorXd> biases;   // 4 vectors

  std::vector<int> layer_sizes() const;
  int input_size() const { return static_cast<int>(weights.front().cols()); }
  int output_size() const { return static_cast<int>(weights.back().rows()); }
};

/// ADAM moment estimates, kept alongside a model when a training run is
/// checkpointed mid-flight.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;
};

struct TrainConfig {
  int epochs = 25;
  int batch_size = 32;
  double learning_rate = 1e-3;
  LossKind loss = LossKind::kMse;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
  std::array<int, 3> hidden = {1024, 512, 256};

  void validate() const;  // throws ConfigError
};

/// He-uniform hidden layers (U +- sqrt(6/fan_in)), Glorot-uniform output
/// layer (U +- sqrt(6/(fan_in+fan_out))), zero biases. Weight entries are
/// drawn in storage order, layer by layer; deterministic given the seed.
MlpModel init_model(int input_size, const std::array<int, 3>& hidden,
                    int output_size, std::uint64_t seed);

/// Single-sample forward pass; returns the K sigmoid outputs in (0, 1).
Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x0);

/// Batched forward pass on column-stacked inputs (L0 x S).
Eigen::MatrixXd forward_batch(const MlpModel& model,
                              const Eigen::MatrixXd& inputs);

/// Mean squared / mean absolute error over a batch, normalized by the
/// number of scalar entries (samples times outputs).
double loss_value(const Eigen::MatrixXd& predicted,
                  const Eigen::MatrixXd& labels, LossKind kind);

struct Gradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
};

/// Exact analytic gradients of the selected loss for a batch of
/// column-stacked inputs/labels. The ReLU subgradient at 0 is 0, and so
/// is the MAE subgradient at zero error.
Gradients backward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& labels, LossKind kind);

struct TrainHistory {
  std::vector<double> train_loss;  // full training-set loss after each epoch
  std::vector<double> val_loss;
};

/// Mini-batch ADAM. Samples are column vectors; the set is reshuffled
/// every epoch with a dedicated seeded stream, the trailing partial batch
/// included. Deterministic given cfg.seed.
MlpModel train(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
               const Eigen::MatrixXd& val_x, const Eigen::MatrixXd& val_y,
               const TrainConfig& cfg, TrainHistory* history = nullptr);

/// Turns network outputs into the transmit power allocation: predictions
/// scaled onto the full power budget exactly as the labels were.
PowerAllocation power_matrix(const Eigen::VectorXd& p_hat,
                             const Eigen::MatrixXcd& bb, double p_total);

/// Checkpoint format: little-endian binary, magic "DLPA-MLP", format
/// version, layer count and dimensions, row-major weight/bias payload,
/// optional ADAM section, CRC-32 trailer. Round-trips bit-exactly.
void save_model(const std::filesystem::path& path, const MlpModel& model,
                const AdamState* adam = nullptr);

struct LoadedModel {
  MlpModel model;
  std::optional<AdamState> adam;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace dlpa
