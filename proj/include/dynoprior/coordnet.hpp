#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "dynoprior/errors.hpp"

namespace dyno {

enum class ActivationKind : std::uint8_t {
  Sinc = 0,
  Gaussian = 1,
  Sine = 2,
  Relu = 3,
};

ActivationKind activation_from_string(const std::string& name);
std::string to_string(ActivationKind kind);

/// Pointwise nonlinearity with bandwidth omega. sinc(w z) = sin(w z)/(w z)
/// with the removable singularity handled by a Taylor branch; gaussian is
/// exp(-z^2/w^2); relu ignores omega (derivative 0 at the kink).
struct Activation {
  ActivationKind kind = ActivationKind::Sinc;
  double omega = 30.0;

  static Activation sinc(double omega = 30.0) { return {ActivationKind::Sinc, omega}; }
  static Activation gaussian(double omega = 0.1) { return {ActivationKind::Gaussian, omega}; }
  static Activation sine(double omega = 30.0) { return {ActivationKind::Sine, omega}; }
  static Activation relu() { return {ActivationKind::Relu, 1.0}; }

  double value(double z) const;
  double deriv(double z) const;

  void apply(Eigen::MatrixXd& z) const;          // in place
  Eigen::MatrixXd derivative(const Eigen::MatrixXd& z) const;
};

/// Fully connected coordinate network. The activation is applied after
/// layers 1..L-1; layer L is affine. Inputs pass through the stored affine
/// normalization first, so a trained network is self-contained.
struct Network {
  std::vector<Eigen::MatrixXd> weights;  // W_l: n_l x n_{l-1}
  std::vector<Eigen::VectorXd> biases;   // b_l: n_l
  Activation activation;
  Eigen::VectorXd input_shift;  // per input dimension
  Eigen::VectorXd input_scale;

  int layers() const { return int(weights.size()); }
  int input_dim() const { return int(weights.front().cols()); }
  int output_dim() const { return int(weights.back().rows()); }
  std::vector<int> widths() const;

  Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& x) const;
};

/// Weights i.i.d. uniform on [-sqrt(6/fan_in), +sqrt(6/fan_in)], biases zero,
/// identity input normalization. Deterministic under seed.
Network init(const std::vector<int>& widths, const Activation& activation,
             std::uint64_t seed);

/// Map each input dimension's [min, max] over `inputs` onto [-1, 1] and store
/// the transform in the network. Call between init and train.
void fit_input_normalization(Network& net, const Eigen::MatrixXd& inputs);

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x);

/// Column-wise forward pass: inputs n0 x N -> outputs nL x N.
Eigen::MatrixXd forward_batch(const Network& net, const Eigen::MatrixXd& x);

/// Analytic Jacobian of forward() with respect to the raw input (the chain
/// factor of the stored input normalization is included): nL x n0.
Eigen::MatrixXd jacobian_t(const Network& net, const Eigen::VectorXd& x);

/// Row i holds f_{L-1}(input column i): N x n_{L-1}.
Eigen::MatrixXd penultimate_features(const Network& net,
                                     const Eigen::MatrixXd& inputs);

struct TrainConfig {
  int iterations = 5000;
  double learning_rate = 1e-4;
  int batch = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  int loss_log_stride = 100;
  /// Final learning rate as a fraction of the initial one; the rate decays
  /// geometrically across iterations. 1.0 = constant.
  double final_lr_fraction = 1.0;
};

struct TrainResult {
  Network network;
  std::vector<double> loss_history;  // training-set MSE every log stride
  double final_loss = 0.0;           // MSE of the returned (best) parameters
};

/// Full-batch (or minibatch) Adam on per-entry MSE. The returned network
/// carries the best-so-far parameters, so the final training MSE never
/// exceeds the initial one. Throws TrainingDivergedError on non-finite loss.
TrainResult train(const Network& net, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& cfg);

struct LossGrad {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
};

/// MSE and its analytic parameter gradients (the quantities train() steps
/// on); exposed so finite-difference checks can target them directly.
LossGrad mse_gradients(const Network& net, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets);

/// Versioned little-endian binary: "DYNO" magic, u32 version, activation tag,
/// omega, layer shapes and row-major weights, then the normalization pairs.
std::vector<std::uint8_t> save(const Network& net);
Network load(const std::vector<std::uint8_t>& bytes);

void save_file(const Network& net, const std::string& path);
Network load_file(const std::string& path);

}  // namespace dyno
