#include "noble/nn.hpp"

#include "noble/error.hpp"
#include "noble/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>

namespace noble {

namespace {

constexpr char kMagic[4] = {'N', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kTagLinear = 1;
constexpr std::uint32_t kTagBatchNorm = 2;
constexpr std::uint32_t kTagActivation = 3;

void write_matrix_rowmajor(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(out, m(r, c));
}

Matrix read_matrix_rowmajor(std::istream& in, Eigen::Index rows,
                            Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_f64(in);
  return m;
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(out, v(i));
}

Vector read_vector(std::istream& in, Eigen::Index size) {
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = read_f64(in);
  return v;
}

Matrix sigmoid_of(const Matrix& logits) {
  return ((-logits.array()).exp() + 1.0).inverse().matrix();
}

}  // namespace

Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return xavier_init(rows, cols, rng);
}

Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  if (rows <= 0 || cols <= 0)
    throw DimensionMismatch("xavier_init needs positive dimensions");
  const double bound =
      std::sqrt(6.0 / static_cast<double>(rows + cols));  // fan_out + fan_in
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

// ---------------------------------------------------------------------------
// Layers

namespace {

class LinearLayer final : public Layer {
 public:
  LinearLayer(Matrix weight, Vector bias)
      : weight_(std::move(weight)),
        bias_(std::move(bias)),
        weight_grad_(Matrix::Zero(weight_.rows(), weight_.cols())),
        bias_grad_(Vector::Zero(bias_.size())) {}

  Matrix forward(const Matrix& x, bool) override {
    if (x.cols() != weight_.cols())
      throw DimensionMismatch("linear layer expects width " +
                              std::to_string(weight_.cols()) + ", got " +
                              std::to_string(x.cols()));
    input_ = x;
    has_cache_ = true;
    Matrix y = x * weight_.transpose();
    y.rowwise() += bias_.transpose();
    return y;
  }

  Matrix backward(const Matrix& g) override {
    if (!has_cache_) throw StaleCache("linear backward without forward");
    weight_grad_ += g.transpose() * input_;
    bias_grad_ += g.colwise().sum().transpose();
    has_cache_ = false;
    return g * weight_;
  }

  std::vector<ParamView> params() override {
    return {{weight_.data(), weight_grad_.data(), weight_.size()},
            {bias_.data(), bias_grad_.data(), bias_.size()}};
  }

  void zero_grad() override {
    weight_grad_.setZero();
    bias_grad_.setZero();
  }

  void save(std::ostream& out) const override {
    write_u32(out, kTagLinear);
    write_u32(out, static_cast<std::uint32_t>(weight_.cols()));
    write_u32(out, static_cast<std::uint32_t>(weight_.rows()));
    write_matrix_rowmajor(out, weight_);
    write_vector(out, bias_);
  }

  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<LinearLayer>(weight_, bias_);
  }

  const Matrix& weight() const { return weight_; }
  Eigen::Index in_dim() const { return weight_.cols(); }
  Eigen::Index out_dim() const { return weight_.rows(); }

 private:
  Matrix weight_;  // out x in
  Vector bias_;
  Matrix weight_grad_;
  Vector bias_grad_;
  Matrix input_;
  bool has_cache_ = false;
};

class BatchNormLayer final : public Layer {
 public:
  explicit BatchNormLayer(Eigen::Index features, double eps = 1e-5,
                          double momentum = 0.1)
      : gamma_(Vector::Ones(features)),
        beta_(Vector::Zero(features)),
        running_mean_(Vector::Zero(features)),
        running_var_(Vector::Ones(features)),
        eps_(eps),
        momentum_(momentum),
        gamma_grad_(Vector::Zero(features)),
        beta_grad_(Vector::Zero(features)) {}

  Matrix forward(const Matrix& x, bool training) override {
    if (x.cols() != gamma_.size())
      throw DimensionMismatch("batchnorm expects width " +
                              std::to_string(gamma_.size()));
    training_pass_ = training;
    if (training) {
      batch_ = static_cast<double>(x.rows());
      Vector mean = x.colwise().mean().transpose();
      centered_ = x.rowwise() - mean.transpose();
      Vector var =
          centered_.array().square().colwise().mean().matrix().transpose();
      inv_std_ = (var.array() + eps_).rsqrt().matrix();
      xhat_ =
          (centered_.array().rowwise() * inv_std_.transpose().array()).matrix();
      running_mean_ = (1.0 - momentum_) * running_mean_ + momentum_ * mean;
      running_var_ = (1.0 - momentum_) * running_var_ + momentum_ * var;
    } else {
      inv_std_ = (running_var_.array() + eps_).rsqrt().matrix();
      xhat_ = ((x.rowwise() - running_mean_.transpose()).array().rowwise() *
               inv_std_.transpose().array())
                  .matrix();
    }
    has_cache_ = true;
    Matrix y = (xhat_.array().rowwise() * gamma_.transpose().array()).matrix();
    y.rowwise() += beta_.transpose();
    return y;
  }

  Matrix backward(const Matrix& g) override {
    if (!has_cache_) throw StaleCache("batchnorm backward without forward");
    gamma_grad_ +=
        (g.array() * xhat_.array()).colwise().sum().matrix().transpose();
    beta_grad_ += g.colwise().sum().transpose();

    Matrix dxhat = (g.array().rowwise() * gamma_.transpose().array()).matrix();
    has_cache_ = false;
    if (!training_pass_) {
      // Running statistics are constants in inference mode.
      return (dxhat.array().rowwise() * inv_std_.transpose().array()).matrix();
    }
    const double n = batch_;
    Vector dvar = ((dxhat.array() * centered_.array())
                       .colwise()
                       .sum()
                       .matrix()
                       .transpose()
                       .array() *
                   (-0.5) * inv_std_.array().cube())
                      .matrix();
    Vector dmean = (-(dxhat.array().rowwise() * inv_std_.transpose().array())
                         .colwise()
                         .sum()
                         .matrix()
                         .transpose()
                         .array() +
                    dvar.array() * centered_.colwise()
                                       .sum()
                                       .matrix()
                                       .transpose()
                                       .array() *
                        (-2.0 / n))
                       .matrix();
    Matrix dx =
        (dxhat.array().rowwise() * inv_std_.transpose().array()).matrix();
    dx += (centered_.array().rowwise() * ((2.0 / n) * dvar).transpose().array())
              .matrix();
    dx.rowwise() += (dmean / n).transpose();
    return dx;
  }

  std::vector<ParamView> params() override {
    return {{gamma_.data(), gamma_grad_.data(), gamma_.size()},
            {beta_.data(), beta_grad_.data(), beta_.size()}};
  }

  void zero_grad() override {
    gamma_grad_.setZero();
    beta_grad_.setZero();
  }

  void save(std::ostream& out) const override {
    write_u32(out, kTagBatchNorm);
    write_u32(out, static_cast<std::uint32_t>(gamma_.size()));
    write_vector(out, gamma_);
    write_vector(out, beta_);
    write_vector(out, running_mean_);
    write_vector(out, running_var_);
    write_f64(out, eps_);
    write_f64(out, momentum_);
  }

  std::unique_ptr<Layer> clone() const override {
    auto copy =
        std::make_unique<BatchNormLayer>(gamma_.size(), eps_, momentum_);
    copy->gamma_ = gamma_;
    copy->beta_ = beta_;
    copy->running_mean_ = running_mean_;
    copy->running_var_ = running_var_;
    return copy;
  }

  void restore(Vector gamma, Vector beta, Vector mean, Vector var) {
    gamma_ = std::move(gamma);
    beta_ = std::move(beta);
    running_mean_ = std::move(mean);
    running_var_ = std::move(var);
  }

 private:
  Vector gamma_, beta_, running_mean_, running_var_;
  double eps_, momentum_;
  Vector gamma_grad_, beta_grad_;
  Matrix xhat_, centered_;
  Vector inv_std_;
  double batch_ = 0.0;
  bool training_pass_ = false;
  bool has_cache_ = false;
};

class ActivationLayer final : public Layer {
 public:
  explicit ActivationLayer(Activation kind) : kind_(kind) {}

  Matrix forward(const Matrix& x, bool) override {
    switch (kind_) {
      case Activation::identity:
        out_ = x;
        break;
      case Activation::tanh:
        out_ = x.array().tanh().matrix();
        break;
      case Activation::sigmoid:
        out_ = sigmoid_of(x);
        break;
    }
    has_cache_ = true;
    return out_;
  }

  Matrix backward(const Matrix& g) override {
    if (!has_cache_) throw StaleCache("activation backward without forward");
    has_cache_ = false;
    switch (kind_) {
      case Activation::tanh:
        return (g.array() * (1.0 - out_.array().square())).matrix();
      case Activation::sigmoid:
        return (g.array() * out_.array() * (1.0 - out_.array())).matrix();
      case Activation::identity:
        break;
    }
    return g;
  }

  std::vector<ParamView> params() override { return {}; }
  void zero_grad() override {}

  void save(std::ostream& out) const override {
    write_u32(out, kTagActivation);
    write_u32(out, static_cast<std::uint32_t>(kind_));
  }

  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<ActivationLayer>(kind_);
  }

 private:
  Activation kind_;
  Matrix out_;
  bool has_cache_ = false;
};

}  // namespace

// ---------------------------------------------------------------------------
// Network

Network::Network(const Network& other) : mode_(other.mode_) {
  layers_.reserve(other.layers_.size());
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

Network& Network::operator=(const Network& other) {
  if (this == &other) return *this;
  Network copy(other);
  *this = std::move(copy);
  return *this;
}

Network Network::mlp(int input_dim, std::span<const int> hidden,
                     int output_dim, std::uint64_t seed,
                     Activation hidden_activation, bool batchnorm) {
  Network net;
  std::mt19937_64 rng(seed);
  int in = input_dim;
  for (int width : hidden) {
    net.add_linear(in, width, rng);
    if (batchnorm) net.add_batchnorm(width);
    net.add_activation(hidden_activation);
    in = width;
  }
  net.add_linear(in, output_dim, rng);
  return net;
}

void Network::add_linear(int in, int out, std::mt19937_64& rng) {
  layers_.push_back(std::make_unique<LinearLayer>(xavier_init(out, in, rng),
                                                  Vector::Zero(out)));
}

void Network::add_batchnorm(int features) {
  layers_.push_back(std::make_unique<BatchNormLayer>(features));
}

void Network::add_activation(Activation kind) {
  layers_.push_back(std::make_unique<ActivationLayer>(kind));
}

int Network::input_dim() const {
  for (const auto& layer : layers_)
    if (auto* lin = dynamic_cast<const LinearLayer*>(layer.get()))
      return static_cast<int>(lin->in_dim());
  return -1;
}

int Network::output_dim() const {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    if (auto* lin = dynamic_cast<const LinearLayer*>(it->get()))
      return static_cast<int>(lin->out_dim());
  return -1;
}

ForwardResult Network::forward(const Matrix& batch) {
  if (layers_.empty()) throw Error("forward through an empty network");
  const int expected = input_dim();  // -1 when no linear layer constrains it
  if (expected >= 0 && static_cast<int>(batch.cols()) != expected)
    throw DimensionMismatch("network expects input width " +
                            std::to_string(expected) + ", got " +
                            std::to_string(batch.cols()));
  // The penultimate embedding is the input to the last linear layer.
  std::size_t last_linear = layers_.size();
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (dynamic_cast<const LinearLayer*>(layers_[i].get())) {
      last_linear = i;
      break;
    }
  }

  ForwardResult result;
  Matrix x = batch;
  const bool training = mode_ == Mode::training;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (i == last_linear) result.embedding = x;
    x = layers_[i]->forward(x, training);
  }
  result.logits = std::move(x);
  result.probs = sigmoid_of(result.logits);
  forward_cached_ = true;
  return result;
}

Matrix Network::backward(const Matrix& logit_grad) {
  if (!forward_cached_) throw StaleCache("backward without a forward pass");
  Matrix g = logit_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  forward_cached_ = false;
  return g;
}

std::vector<ParamView> Network::parameters() {
  std::vector<ParamView> all;
  for (const auto& layer : layers_)
    for (const ParamView& p : layer->params()) all.push_back(p);
  return all;
}

void Network::zero_grad() {
  for (const auto& layer : layers_) layer->zero_grad();
}

const Matrix& Network::last_linear_weight() const {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    if (auto* lin = dynamic_cast<const LinearLayer*>(it->get()))
      return lin->weight();
  throw Error("network has no linear layer");
}

void Network::save(std::ostream& out) const {
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& layer : layers_) layer->save(out);
  if (!out) throw IoError("network save failed");
}

Network Network::load(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kMagic, 4))
    throw FormatError("bad network checkpoint magic", 1, 1);
  const std::uint32_t version = read_u32(in);
  if (version != kVersion)
    throw FormatError(
        "unsupported checkpoint version " + std::to_string(version), 1, 1);
  const std::uint32_t count = read_u32(in);
  Network net;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t tag = read_u32(in);
    if (tag == kTagLinear) {
      const auto in_dim = static_cast<Eigen::Index>(read_u32(in));
      const auto out_dim = static_cast<Eigen::Index>(read_u32(in));
      Matrix weight = read_matrix_rowmajor(in, out_dim, in_dim);
      Vector bias = read_vector(in, out_dim);
      net.layers_.push_back(
          std::make_unique<LinearLayer>(std::move(weight), std::move(bias)));
    } else if (tag == kTagBatchNorm) {
      const auto features = static_cast<Eigen::Index>(read_u32(in));
      Vector gamma = read_vector(in, features);
      Vector beta = read_vector(in, features);
      Vector mean = read_vector(in, features);
      Vector var = read_vector(in, features);
      const double eps = read_f64(in);
      const double momentum = read_f64(in);
      auto bn = std::make_unique<BatchNormLayer>(features, eps, momentum);
      bn->restore(std::move(gamma), std::move(beta), std::move(mean),
                  std::move(var));
      net.layers_.push_back(std::move(bn));
    } else if (tag == kTagActivation) {
      net.layers_.push_back(std::make_unique<ActivationLayer>(
          static_cast<Activation>(read_u32(in))));
    } else {
      throw FormatError("unknown layer tag " + std::to_string(tag), 1, 1);
    }
  }
  net.set_mode(Mode::inference);
  return net;
}

void save_network(const Network& net, const std::string& path) {
  std::ostringstream buffer;
  net.save(buffer);
  atomic_write_file(path, buffer.str());
}

Network load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open checkpoint " + path);
  return Network::load(in);
}

// ---------------------------------------------------------------------------
// Losses

LossResult bce_loss(const Matrix& probs, const Matrix& targets) {
  if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
    throw DimensionMismatch("bce_loss shape mismatch");
  const double batch = static_cast<double>(probs.rows());
  constexpr double kClamp = 1e-12;
  Eigen::ArrayXXd p = probs.array().min(1.0 - kClamp).max(kClamp);
  Eigen::ArrayXXd t = targets.array();
  LossResult result;
  result.value = (-(t * p.log()) - (1.0 - t) * (1.0 - p).log()).sum() / batch;
  result.logit_grad = (probs - targets) / batch;
  return result;
}

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw DimensionMismatch("mse_loss shape mismatch");
  const double batch = static_cast<double>(pred.rows());
  LossResult result;
  result.value = (pred - target).squaredNorm() / batch;
  result.logit_grad = 2.0 * (pred - target) / batch;
  return result;
}

// ---------------------------------------------------------------------------
// Optimizer and training loop

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (l2 < 0.0) throw ConfigError("l2 must be >= 0");
}

Optimizer::Optimizer(const TrainConfig& config, std::vector<ParamView> params)
    : kind_(config.optimizer),
      lr_(config.learning_rate),
      l2_(config.l2),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      params_(std::move(params)) {
  if (kind_ == OptimizerKind::adam) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const ParamView& p : params_) {
      m_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
      v_.emplace_back(static_cast<std::size_t>(p.size), 0.0);
    }
  }
}

void Optimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ParamView& p = params_[i];
    for (Eigen::Index j = 0; j < p.size; ++j) {
      const double g = p.grad[j] + l2_ * p.value[j];
      if (kind_ == OptimizerKind::sgd) {
        p.value[j] -= lr_ * g;
      } else {
        double& m = m_[i][static_cast<std::size_t>(j)];
        double& v = v_[i][static_cast<std::size_t>(j)];
        m = beta1_ * m + (1.0 - beta1_) * g;
        v = beta2_ * v + (1.0 - beta2_) * g * g;
        p.value[j] -= lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_);
      }
    }
  }
}

namespace {

double evaluate_loss(Network& net, const Matrix& inputs, const Matrix& targets,
                     LossKind loss) {
  const Network::Mode saved = net.mode();
  net.set_mode(Network::Mode::inference);
  ForwardResult out = net.forward(inputs);
  net.set_mode(saved);
  return loss == LossKind::bce ? bce_loss(out.probs, targets).value
                               : mse_loss(out.logits, targets).value;
}

std::string snapshot(const Network& net) {
  std::ostringstream buffer;
  net.save(buffer);
  return buffer.str();
}

}  // namespace

TrainTrace train(Network& net, const Matrix& inputs, const Matrix& targets,
                 LossKind loss, const TrainConfig& config,
                 const Matrix* val_inputs, const Matrix* val_targets) {
  config.validate();
  if (inputs.rows() != targets.rows())
    throw DimensionMismatch("inputs and targets disagree on sample count");
  if (inputs.rows() == 0) throw EmptyDataset("nothing to train on");
  const bool has_val = val_inputs != nullptr && val_targets != nullptr;

  Optimizer optimizer(config, net.parameters());
  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.rows()));
  std::iota(order.begin(), order.end(), 0);

  TrainTrace trace;
  trace.best_val_loss = std::numeric_limits<double>::infinity();
  std::string best_params;
  int epochs_since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    net.set_mode(Network::Mode::training);

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min(
          static_cast<std::size_t>(config.batch_size), order.size() - start);
      Matrix x(count, inputs.cols());
      Matrix y(count, targets.cols());
      for (std::size_t r = 0; r < count; ++r) {
        x.row(static_cast<Eigen::Index>(r)) = inputs.row(order[start + r]);
        y.row(static_cast<Eigen::Index>(r)) = targets.row(order[start + r]);
      }
      ForwardResult out = net.forward(x);
      LossResult batch_loss = loss == LossKind::bce ? bce_loss(out.probs, y)
                                                    : mse_loss(out.logits, y);
      if (!std::isfinite(batch_loss.value))
        throw DivergedLoss("training loss became non-finite", epoch);
      net.zero_grad();
      net.backward(batch_loss.logit_grad);
      optimizer.step();
      epoch_loss += batch_loss.value * static_cast<double>(count);
      seen += count;
    }
    trace.train_loss.push_back(epoch_loss / static_cast<double>(seen));

    if (has_val) {
      const double val = evaluate_loss(net, *val_inputs, *val_targets, loss);
      if (!std::isfinite(val))
        throw DivergedLoss("validation loss became non-finite", epoch);
      trace.val_loss.push_back(val);
      if (val < trace.best_val_loss) {
        trace.best_val_loss = val;
        trace.best_epoch = epoch;
        best_params = snapshot(net);
        epochs_since_best = 0;
      } else if (++epochs_since_best >= config.patience) {
        break;
      }
    }
  }

  if (has_val && !best_params.empty()) {
    std::istringstream in(best_params);
    net = Network::load(in);
  }
  net.set_mode(Network::Mode::inference);
  return trace;
}

}  // namespace noble
