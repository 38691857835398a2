#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "csisense/error.hpp"
#include "csisense/linalg.hpp"
#include "csisense/random.hpp"

namespace csisense {

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t epochs = 500;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double svm_c = 1.0;
  std::size_t svm_epochs = 200;

  void validate() const {
    if (epochs == 0 || batch_size == 0 || svm_epochs == 0)
      throw ArgumentError("TrainConfig: epochs, batch_size and svm_epochs must be positive");
    if (!(learning_rate > 0.0) || !(adam_eps > 0.0) || !(svm_c > 0.0))
      throw ArgumentError("TrainConfig: learning_rate, adam_eps and svm_c must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
      throw ArgumentError("TrainConfig: adam betas must lie in (0, 1)");
  }

  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

inline nlohmann::json train_config_to_json(const TrainConfig &c) {
  return {{"seed", c.seed},       {"epochs", c.epochs},         {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2},
          {"adam_eps", c.adam_eps}, {"svm_c", c.svm_c},          {"svm_epochs", c.svm_epochs}};
}

inline TrainConfig train_config_from_json(const nlohmann::json &j) {
  TrainConfig c;
  c.seed = j.value("seed", c.seed);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.svm_c = j.value("svm_c", c.svm_c);
  c.svm_epochs = j.value("svm_epochs", c.svm_epochs);
  c.validate();
  return c;
}

inline void check_training_set(const Matrix &X, std::span<const int> y) {
  if (X.rows() == 0) throw ArgumentError("training set is empty");
  if (y.size() != X.rows()) throw ArgumentError("label count does not match row count");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw ArgumentError("labels must be 0 or 1");
    (v == 0 ? has0 : has1) = true;
  }
  if (!has0 || !has1) throw ArgumentError("training set must contain both classes");
  for (double v : X.data())
    if (!std::isfinite(v)) throw ArgumentError("training set contains non-finite values");
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-feature affine map to zero mean and unit variance (population
/// statistics of the training rows). Constant features keep std = 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer identity(std::size_t dim) {
    return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  }

  static Standardizer fit(const Matrix &X) {
    if (X.rows() == 0) throw ArgumentError("Standardizer::fit: no rows");
    const std::size_t R = X.rows(), C = X.cols();
    Standardizer s{std::vector<double>(C, 0.0), std::vector<double>(C, 0.0)};
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) s.mean[c] += X(r, c);
    for (auto &m : s.mean) m /= static_cast<double>(R);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) {
        const double d = X(r, c) - s.mean[c];
        s.stddev[c] += d * d;
      }
    for (auto &v : s.stddev) {
      v = std::sqrt(v / static_cast<double>(R));
      if (!(v > 0.0)) v = 1.0;
    }
    return s;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return mean.size(); }

  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != dim())
      throw ArgumentError("Standardizer: expected " + std::to_string(dim()) + " features, got " +
                          std::to_string(x.size()));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / stddev[i];
    return out;
  }

  [[nodiscard]] Matrix apply(const Matrix &X) const {
    Matrix out(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const auto z = apply(X.row(r));
      std::copy(z.begin(), z.end(), out.row(r).begin());
    }
    return out;
  }

  friend bool operator==(const Standardizer &, const Standardizer &) = default;
};

// ---------------------------------------------------------------------------
// Linear SVM
// ---------------------------------------------------------------------------

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  double c = 1.0;
  Standardizer scaler;
  TrainConfig config;
  /// Primal objective after each epoch (training diagnostics, not persisted).
  std::vector<double> objective_history;

  [[nodiscard]] std::size_t input_dim() const noexcept { return w.size(); }
};

/// w . x' + b on already standardized features.
inline double svm_margin(std::span<const double> w, double b, std::span<const double> z) {
  double s = b;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * z[i];
  return s;
}

/// Primal objective 1/2 |w|^2 + C * sum of hinge losses on standardized rows Z.
inline double svm_objective(std::span<const double> w, double b, double c, const Matrix &Z,
                            std::span<const int> y) {
  double hinge = 0.0;
  for (std::size_t r = 0; r < Z.rows(); ++r) {
    const double yy = y[r] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yy * svm_margin(w, b, Z.row(r)));
  }
  double ww = 0.0;
  for (double v : w) ww += v * v;
  return 0.5 * ww + c * hinge;
}

/// Stochastic subgradient descent (Pegasos) on the objective above, rescaled
/// to lambda/2 |w|^2 + mean hinge with lambda = 1/(C n) and step 1/(lambda t).
/// Samples are visited in a seeded shuffled order every epoch; the returned
/// weights are the average of the iterates of the final epoch. The bias is
/// not regularized.
inline SvmModel svm_train(const Matrix &X, std::span<const int> y, const TrainConfig &cfg) {
  cfg.validate();
  check_training_set(X, y);
  SvmModel model;
  model.c = cfg.svm_c;
  model.config = cfg;
  model.scaler = Standardizer::fit(X);
  const Matrix Z = model.scaler.apply(X);
  const std::size_t n = Z.rows(), dim = Z.cols();
  const double lambda = 1.0 / (cfg.svm_c * static_cast<double>(n));

  rng::Engine eng(rng::derive_seed(cfg.seed, 0x5F));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> w(dim, 0.0), w_avg(dim);
  double b = 0.0, b_avg = 0.0;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.svm_epochs; ++epoch) {
    rng::shuffle<std::size_t>(order, eng);
    std::fill(w_avg.begin(), w_avg.end(), 0.0);
    b_avg = 0.0;
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto z = Z.row(idx);
      const double yy = y[idx] == 1 ? 1.0 : -1.0;
      const double margin = yy * svm_margin(w, b, z);
      const double shrink = 1.0 - eta * lambda;
      for (auto &v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t i = 0; i < dim; ++i) w[i] += eta * yy * z[i];
        b += eta * yy;
      }
      for (std::size_t i = 0; i < dim; ++i) w_avg[i] += w[i];
      b_avg += b;
    }
    for (auto &v : w_avg) v /= static_cast<double>(n);
    b_avg /= static_cast<double>(n);
    model.objective_history.push_back(svm_objective(w_avg, b_avg, cfg.svm_c, Z, y));
  }
  model.w = w_avg;
  model.b = b_avg;
  return model;
}

inline double svm_decision(const SvmModel &m, std::span<const double> x) {
  if (x.size() != m.input_dim())
    throw ArgumentError("svm: expected " + std::to_string(m.input_dim()) + " features, got " +
                        std::to_string(x.size()));
  return svm_margin(m.w, m.b, m.scaler.apply(x));
}

/// 1 iff the decision value is strictly positive.
inline int svm_predict(const SvmModel &m, std::span<const double> x) { return svm_decision(m, x) > 0.0 ? 1 : 0; }

inline std::vector<int> svm_predict(const SvmModel &m, const Matrix &X) {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = svm_predict(m, X.row(r));
  return out;
}

// ---------------------------------------------------------------------------
// Feedforward network: in -> 64 -> 32 -> 16 -> 8 (elu) -> 2 (softmax)
// ---------------------------------------------------------------------------

inline constexpr std::array<std::size_t, 5> kLayerWidths{64, 32, 16, 8, 2};
inline constexpr double kEluAlpha = 1.0;

inline double elu(double z) { return z > 0.0 ? z : kEluAlpha * std::expm1(z); }
inline double elu_derivative(double z) { return z > 0.0 ? 1.0 : kEluAlpha * std::exp(z); }

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out

  [[nodiscard]] std::size_t param_count() const noexcept { return in * out + out; }

  friend bool operator==(const DenseLayer &, const DenseLayer &) = default;
};

/// Gradient buffers with the same shapes as the network layers.
struct NetworkGradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

class Network {
 public:
  Network() = default;

  /// Glorot-uniform weights, zero biases.
  static Network glorot(std::size_t input_dim, std::uint64_t seed) {
    if (input_dim == 0) throw ArgumentError("Network: input dimension must be positive");
    Network net;
    rng::Engine eng(rng::derive_seed(seed, 0x1A));
    std::size_t in = input_dim;
    for (std::size_t width : kLayerWidths) {
      DenseLayer l{in, width, std::vector<double>(in * width), std::vector<double>(width, 0.0)};
      const double limit = std::sqrt(6.0 / static_cast<double>(in + width));
      for (auto &w : l.weights) w = rng::uniform(eng, -limit, limit);
      net.layers_.push_back(std::move(l));
      in = width;
    }
    return net;
  }

  static Network from_layers(std::vector<DenseLayer> layers) {
    if (layers.size() != kLayerWidths.size()) throw FormatError("Network: expected 5 layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto &l = layers[i];
      if (l.out != kLayerWidths[i]) throw FormatError("Network: layer " + std::to_string(i) + " has wrong width");
      if (i > 0 && l.in != layers[i - 1].out) throw FormatError("Network: layer dimensions do not chain");
      if (l.weights.size() != l.in * l.out || l.bias.size() != l.out)
        throw FormatError("Network: layer " + std::to_string(i) + " parameter count mismatch");
    }
    Network net;
    net.layers_ = std::move(layers);
    return net;
  }

  [[nodiscard]] const std::vector<DenseLayer> &layers() const noexcept { return layers_; }
  [[nodiscard]] std::size_t input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in; }

  [[nodiscard]] std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto &l : layers_) n += l.param_count();
    return n;
  }

  /// Flattened parameters: per layer, weights then biases.
  [[nodiscard]] std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(param_count());
    for (const auto &l : layers_) {
      p.insert(p.end(), l.weights.begin(), l.weights.end());
      p.insert(p.end(), l.bias.begin(), l.bias.end());
    }
    return p;
  }

  void set_parameters(std::span<const double> p) {
    if (p.size() != param_count()) throw ArgumentError("Network::set_parameters: size mismatch");
    std::size_t k = 0;
    for (auto &l : layers_) {
      for (auto &w : l.weights) w = p[k++];
      for (auto &b : l.bias) b = p[k++];
    }
  }

  /// Class probabilities for one (already standardized) input.
  [[nodiscard]] std::array<double, 2> forward(std::span<const double> x) const {
    Trace tr;
    run(x, tr);
    return softmax(tr.pre.back());
  }

  /// Mean categorical cross-entropy over rows of X and its gradient.
  double loss_and_gradient(const Matrix &X, std::span<const int> y, std::span<const std::size_t> rows,
                           NetworkGradient &grad) const {
    zero(grad);
    double loss = 0.0;
    Trace tr;
    std::vector<double> delta, prev_delta;
    for (std::size_t r : rows) {
      run(X.row(r), tr);
      const auto &logits = tr.pre.back();
      const double mx = std::max(logits[0], logits[1]);
      const double lse = mx + std::log(std::exp(logits[0] - mx) + std::exp(logits[1] - mx));
      loss += lse - logits[static_cast<std::size_t>(y[r])];
      const auto p = softmax(logits);
      delta = {p[0] - (y[r] == 0 ? 1.0 : 0.0), p[1] - (y[r] == 1 ? 1.0 : 0.0)};

      for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto &l = layers_[li];
        const auto &input = tr.act[li];
        auto &gw = grad.weights[li];
        auto &gb = grad.bias[li];
        for (std::size_t o = 0; o < l.out; ++o) {
          gb[o] += delta[o];
          double *row = gw.data() + o * l.in;
          for (std::size_t i = 0; i < l.in; ++i) row[i] += delta[o] * input[i];
        }
        if (li == 0) break;
        prev_delta.assign(l.in, 0.0);
        for (std::size_t o = 0; o < l.out; ++o) {
          const double *row = l.weights.data() + o * l.in;
          for (std::size_t i = 0; i < l.in; ++i) prev_delta[i] += row[i] * delta[o];
        }
        const auto &z = tr.pre[li - 1];
        for (std::size_t i = 0; i < l.in; ++i) prev_delta[i] *= elu_derivative(z[i]);
        std::swap(delta, prev_delta);
      }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (auto &g : grad.weights)
      for (auto &v : g) v *= inv;
    for (auto &g : grad.bias)
      for (auto &v : g) v *= inv;
    return loss * inv;
  }

  [[nodiscard]] NetworkGradient make_gradient() const {
    NetworkGradient g;
    for (const auto &l : layers_) {
      g.weights.emplace_back(l.weights.size(), 0.0);
      g.bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
  }

  std::vector<DenseLayer> &mutable_layers() noexcept { return layers_; }

  friend bool operator==(const Network &, const Network &) = default;

 private:
  struct Trace {
    std::vector<std::vector<double>> act;  // act[i] = input to layer i
    std::vector<std::vector<double>> pre;  // pre[i] = pre-activation of layer i
  };

  static std::array<double, 2> softmax(const std::vector<double> &z) {
    const double mx = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - mx), e1 = std::exp(z[1] - mx);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
  }

  static void zero(NetworkGradient &g) {
    for (auto &v : g.weights) std::fill(v.begin(), v.end(), 0.0);
    for (auto &v : g.bias) std::fill(v.begin(), v.end(), 0.0);
  }

  void run(std::span<const double> x, Trace &tr) const {
    if (x.size() != input_dim())
      throw ArgumentError("nn: expected " + std::to_string(input_dim()) + " features, got " +
                          std::to_string(x.size()));
    tr.act.resize(layers_.size());
    tr.pre.resize(layers_.size());
    tr.act[0].assign(x.begin(), x.end());
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const auto &l = layers_[li];
      auto &z = tr.pre[li];
      z.assign(l.out, 0.0);
      const auto &in = tr.act[li];
      for (std::size_t o = 0; o < l.out; ++o) {
        const double *row = l.weights.data() + o * l.in;
        double s = l.bias[o];
        for (std::size_t i = 0; i < l.in; ++i) s += row[i] * in[i];
        z[o] = s;
      }
      if (li + 1 < layers_.size()) {
        auto &a = tr.act[li + 1];
        a.resize(l.out);
        for (std::size_t o = 0; o < l.out; ++o) a[o] = elu(z[o]);
      }
    }
  }

  std::vector<DenseLayer> layers_;
};

struct NnModel {
  Network net;
  Standardizer scaler;
  TrainConfig config;
  /// Mean training loss per epoch (diagnostics, not persisted).
  std::vector<double> loss_history;

  [[nodiscard]] std::size_t input_dim() const noexcept { return net.input_dim(); }
};

inline NnModel nn_init(std::size_t input_dim, std::uint64_t seed) {
  NnModel m;
  m.net = Network::glorot(input_dim, seed);
  m.scaler = Standardizer::identity(input_dim);
  m.config.seed = seed;
  return m;
}

inline std::array<double, 2> nn_forward(const NnModel &m, std::span<const double> x) {
  return m.net.forward(m.scaler.apply(x));
}

/// argmax; ties go to class 0.
inline int nn_predict(const NnModel &m, std::span<const double> x) {
  const auto p = nn_forward(m, x);
  return p[1] > p[0] ? 1 : 0;
}

inline std::vector<int> nn_predict(const NnModel &m, const Matrix &X) {
  std::vector<int> out(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) out[r] = nn_predict(m, X.row(r));
  return out;
}

/// Adam on mean categorical cross-entropy. The standardizer is refit on X.
inline NnModel nn_train(NnModel model, const Matrix &X, std::span<const int> y, const TrainConfig &cfg) {
  cfg.validate();
  check_training_set(X, y);
  if (X.cols() != model.input_dim())
    throw ArgumentError("nn_train: expected " + std::to_string(model.input_dim()) + " features, got " +
                        std::to_string(X.cols()));
  model.config = cfg;
  model.scaler = Standardizer::fit(X);
  model.loss_history.clear();
  const Matrix Z = model.scaler.apply(X);

  const std::size_t P = model.net.param_count();
  std::vector<double> m1(P, 0.0), m2(P, 0.0);
  auto grad = model.net.make_gradient();
  rng::Engine eng(rng::derive_seed(cfg.seed, 0x2B));
  std::vector<std::size_t> order(Z.rows());
  std::iota(order.begin(), order.end(), 0);
  double beta1_t = 1.0, beta2_t = 1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::shuffle<std::size_t>(order, eng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batches) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const double loss = model.net.loss_and_gradient(Z, y, rows, grad);
      if (!std::isfinite(loss))
        throw TrainingError("nn_train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batches));
      epoch_loss += loss;

      beta1_t *= cfg.beta1;
      beta2_t *= cfg.beta2;
      const double lr_t = cfg.learning_rate * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
      std::size_t k = 0;
      auto step = [&](std::vector<double> &params, const std::vector<double> &g) {
        for (std::size_t i = 0; i < params.size(); ++i, ++k) {
          m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * g[i];
          m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * g[i] * g[i];
          params[i] -= lr_t * m1[k] / (std::sqrt(m2[k]) + cfg.adam_eps);
        }
      };
      auto &layers = model.net.mutable_layers();
      for (std::size_t li = 0; li < layers.size(); ++li) {
        step(layers[li].weights, grad.weights[li]);
        step(layers[li].bias, grad.bias[li]);
      }
    }
    model.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Either model, plus JSON persistence
// ---------------------------------------------------------------------------

enum class ModelKind { Svm, Nn };

inline std::string model_kind_name(ModelKind k) { return k == ModelKind::Svm ? "svm" : "nn"; }

inline ModelKind parse_model_kind(const std::string &s) {
  if (s == "svm") return ModelKind::Svm;
  if (s == "nn") return ModelKind::Nn;
  throw ArgumentError("unknown model kind '" + s + "' (expected svm or nn)");
}

using ClassifierModel = std::variant<SvmModel, NnModel>;

inline ModelKind kind_of(const ClassifierModel &m) {
  return std::holds_alternative<SvmModel>(m) ? ModelKind::Svm : ModelKind::Nn;
}

inline ClassifierModel train_model(ModelKind kind, const Matrix &X, std::span<const int> y,
                                   const TrainConfig &cfg) {
  if (kind == ModelKind::Svm) return svm_train(X, y, cfg);
  return nn_train(nn_init(X.cols(), cfg.seed), X, y, cfg);
}

inline std::vector<int> predict(const ClassifierModel &m, const Matrix &X) {
  return std::visit(
      [&](const auto &model) {
        if constexpr (std::is_same_v<std::decay_t<decltype(model)>, SvmModel>)
          return svm_predict(model, X);
        else
          return nn_predict(model, X);
      },
      m);
}

inline nlohmann::json standardizer_to_json(const Standardizer &s) {
  return {{"mean", s.mean}, {"std", s.stddev}};
}

inline Standardizer standardizer_from_json(const nlohmann::json &j) {
  Standardizer s{j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
  if (s.mean.size() != s.stddev.size()) throw FormatError("standardizer: mean/std length mismatch");
  for (double v : s.stddev)
    if (!(v > 0.0)) throw FormatError("standardizer: std must be positive");
  return s;
}

inline nlohmann::json model_to_json(const ClassifierModel &model) {
  if (const auto *svm = std::get_if<SvmModel>(&model)) {
    return {{"kind", "svm"},
            {"input_dim", svm->input_dim()},
            {"w", svm->w},
            {"b", svm->b},
            {"C", svm->c},
            {"standardizer", standardizer_to_json(svm->scaler)},
            {"config", train_config_to_json(svm->config)},
            {"seed", svm->config.seed}};
  }
  const auto &nn = std::get<NnModel>(model);
  nlohmann::json dims = nlohmann::json::array({nn.input_dim()});
  nlohmann::json weights = nlohmann::json::array(), biases = nlohmann::json::array();
  for (const auto &l : nn.net.layers()) {
    dims.push_back(l.out);
    weights.push_back(l.weights);
    biases.push_back(l.bias);
  }
  return {{"kind", "nn"},
          {"input_dim", nn.input_dim()},
          {"layer_dims", dims},
          {"activations", {"elu", "elu", "elu", "elu", "softmax"}},
          {"weights", weights},
          {"biases", biases},
          {"standardizer", standardizer_to_json(nn.scaler)},
          {"config", train_config_to_json(nn.config)},
          {"seed", nn.config.seed}};
}

inline ClassifierModel model_from_json(const nlohmann::json &j) {
  try {
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto dim = j.at("input_dim").get<std::size_t>();
    const auto scaler = standardizer_from_json(j.at("standardizer"));
    const auto cfg = train_config_from_json(j.at("config"));
    if (scaler.dim() != dim) throw FormatError("model: standardizer dimension mismatch");
    if (kind == ModelKind::Svm) {
      SvmModel m;
      m.w = j.at("w").get<std::vector<double>>();
      m.b = j.at("b").get<double>();
      m.c = j.at("C").get<double>();
      m.scaler = scaler;
      m.config = cfg;
      if (m.w.size() != dim) throw FormatError("svm model: weight length mismatch");
      return m;
    }
    const auto dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (dims.size() != kLayerWidths.size() + 1 || weights.size() != kLayerWidths.size() ||
        biases.size() != kLayerWidths.size() || dims.front() != dim)
      throw FormatError("nn model: layer layout mismatch");
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i < kLayerWidths.size(); ++i)
      layers.push_back({dims[i], dims[i + 1], weights[i], biases[i]});
    NnModel m;
    m.net = Network::from_layers(std::move(layers));
    m.scaler = scaler;
    m.config = cfg;
    return m;
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(std::string("model: ") + ex.what());
  } catch (const ArgumentError &ex) {
    throw FormatError(std::string("model: ") + ex.what());
  }
}

}  // namespace csisense
