#pragma once

#include "noble/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace noble {

enum class Activation { identity, tanh, sigmoid };

/// Flat view over one parameter array and its gradient accumulator.
struct ParamView {
  double* value = nullptr;
  double* grad = nullptr;
  Eigen::Index size = 0;
};

/// Xavier (Glorot) uniform initialization: entries i.i.d. uniform on
/// +-sqrt(6 / (fan_in + fan_out)) with fan_in = cols, fan_out = rows.
Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Matrix forward(const Matrix& x, bool training) = 0;
  /// Consumes the cached forward pass; returns the gradient w.r.t. the
  /// layer input and accumulates parameter gradients.
  virtual Matrix backward(const Matrix& grad_out) = 0;
  virtual std::vector<ParamView> params() = 0;
  virtual void zero_grad() = 0;
  virtual void save(std::ostream& out) const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
};

struct ForwardResult {
  Matrix logits;     // raw output of the last layer
  Matrix probs;      // sigmoid(logits)
  Matrix embedding;  // input to the last linear layer (penultimate output)
};

/// A sequential dense network: linear, batch-norm and activation layers.
/// Training mode uses batch statistics and updates running stats; inference
/// mode is a pure function of the input.
class Network {
 public:
  enum class Mode { training, inference };

  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  /// Standard topology: per hidden width, linear + batchnorm + activation;
  /// then a plain linear output layer. Xavier weights, zero biases.
  static Network mlp(int input_dim, std::span<const int> hidden, int output_dim,
                     std::uint64_t seed, Activation hidden_activation = Activation::tanh,
                     bool batchnorm = true);

  void add_linear(int in, int out, std::mt19937_64& rng);
  void add_batchnorm(int features);
  void add_activation(Activation kind);

  void set_mode(Mode mode) { mode_ = mode; }
  Mode mode() const { return mode_; }

  int input_dim() const;
  int output_dim() const;

  /// Runs the batch (rows = samples) through the stack. Throws
  /// DimensionMismatch when the batch width does not match.
  ForwardResult forward(const Matrix& batch);

  /// Reverse-mode pass from a gradient w.r.t. the logits; returns the
  /// gradient w.r.t. the network input. Parameter gradients accumulate, so
  /// call zero_grad() between steps. Throws StaleCache without a prior
  /// forward pass.
  Matrix backward(const Matrix& logit_grad);

  std::vector<ParamView> parameters();
  void zero_grad();

  /// Weight rows of the final linear layer (one row per output class).
  const Matrix& last_linear_weight() const;

  std::size_t layer_count() const { return layers_.size(); }

  /// Versioned little-endian binary checkpoint (magic "NNET").
  void save(std::ostream& out) const;
  static Network load(std::istream& in);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  Mode mode_ = Mode::training;
  bool forward_cached_ = false;
};

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

struct LossResult {
  double value = 0.0;
  Matrix logit_grad;  // gradient w.r.t. the pre-sigmoid logits (BCE) or
                      // the raw predictions (MSE)
};

/// Multi-hot binary cross entropy, summed across classes and averaged over
/// the batch. Probabilities are clamped to [1e-12, 1-1e-12] before the
/// logs; the logit gradient is (probs - targets) / batch.
LossResult bce_loss(const Matrix& probs, const Matrix& targets);

/// Mean squared Euclidean error over the batch; gradient
/// 2 (pred - target) / batch.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

enum class OptimizerKind { sgd, adam };
enum class LossKind { bce, mse };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 300;
  std::uint64_t seed = 0;
  double l2 = 0.0;
  int patience = 20;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;

  void validate() const;
};

/// First-order update over ParamViews. L2 decay is added to the raw
/// gradient before the step.
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, std::vector<ParamView> params);
  void step();

 private:
  OptimizerKind kind_;
  double lr_, l2_, beta1_, beta2_, eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<ParamView> params_;
  std::vector<std::vector<double>> m_, v_;
};

struct TrainTrace {
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> val_loss;    // empty without a validation split
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

/// Mini-batch training with seeded shuffling and optional early stopping on
/// a validation split (the best-validation parameters are restored). Throws
/// DivergedLoss when the loss turns non-finite.
TrainTrace train(Network& net, const Matrix& inputs, const Matrix& targets,
                 LossKind loss, const TrainConfig& config,
                 const Matrix* val_inputs = nullptr,
                 const Matrix* val_targets = nullptr);

}  // namespace noble
