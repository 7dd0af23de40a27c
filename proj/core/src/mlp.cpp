#include "dlpa/mlp.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "dlpa/errors.hpp"
#include "dlpa/rng.hpp"

namespace dlpa {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return ((-z.array()).exp() + 1.0).inverse().matrix();
}

void check_forward_shapes(const MlpModel& model, Eigen::Index rows) {
  if (model.weights.size() != model.biases.size() || model.weights.empty())
    throw ValidationError("malformed model");
  if (rows != model.weights.front().cols())
    throw ValidationError("input size " + std::to_string(rows) +
                          " does not match model input " +
                          std::to_string(model.weights.front().cols()));
}

/// Activations of every layer for a batch; [0] is the input itself.
std::vector<Eigen::MatrixXd> forward_trace(const MlpModel& model,
                                           const Eigen::MatrixXd& inputs) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.weights.size() + 1);
  acts.push_back(inputs);
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    Eigen::MatrixXd z =
        (model.weights[i] * acts.back()).colwise() + model.biases[i];
    acts.push_back(i + 1 == model.weights.size() ? sigmoid(z) : relu(z));
  }
  return acts;
}

}  // namespace

std::vector<int> MlpModel::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) throw ConfigError("bad training sizes");
  if (learning_rate <= 0) throw ConfigError("learning rate must be positive");
  if (!(adam_beta1 > 0 && adam_beta1 < 1 && adam_beta2 > 0 && adam_beta2 < 1))
    throw ConfigError("ADAM betas must lie in (0, 1)");
  if (adam_epsilon <= 0) throw ConfigError("ADAM epsilon must be positive");
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden sizes must be >= 1");
}

MlpModel init_model(int input_size, const std::array<int, 3>& hidden,
                    int output_size, std::uint64_t seed) {
  if (input_size < 1 || output_size < 1)
    throw ConfigError("bad model dimensions");
  std::vector<int> dims = {input_size, hidden[0], hidden[1], hidden[2],
                           output_size};
  MlpModel model;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int fan_in = dims[i];
    const int fan_out = dims[i + 1];
    const bool output_layer = (i + 2 == dims.size());
    const double bound = output_layer
                             ? std::sqrt(6.0 / (fan_in + fan_out))
                             : std::sqrt(6.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    double* data = w.data();
    for (Eigen::Index j = 0; j < w.size(); ++j)
      data[j] = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::VectorXd& x0) {
  return forward_batch(model, x0);
}

Eigen::MatrixXd forward_batch(const MlpModel& model,
                              const Eigen::MatrixXd& inputs) {
  check_forward_shapes(model, inputs.rows());
  Eigen::MatrixXd a = inputs;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    Eigen::MatrixXd z = (model.weights[i] * a).colwise() + model.biases[i];
    a = i + 1 == model.weights.size() ? sigmoid(z) : relu(z);
  }
  return a;
}

double loss_value(const Eigen::MatrixXd& predicted,
                  const Eigen::MatrixXd& labels, LossKind kind) {
  if (predicted.rows() != labels.rows() || predicted.cols() != labels.cols())
    throw ValidationError("prediction/label shape mismatch");
  const double count = static_cast<double>(predicted.size());
  const Eigen::ArrayXXd err = (labels - predicted).array();
  return kind == LossKind::kMse ? err.square().sum() / count
                                : err.abs().sum() / count;
}

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& labels, LossKind kind) {
  check_forward_shapes(model, inputs.rows());
  if (labels.cols() != inputs.cols() ||
      labels.rows() != model.weights.back().rows())
    throw ValidationError("label shape mismatch");

  const auto acts = forward_trace(model, inputs);
  const Eigen::MatrixXd& out = acts.back();
  const double count = static_cast<double>(out.size());

  // dL/d(pre-sigmoid): loss derivative times sigmoid'.
  Eigen::ArrayXXd err = (out - labels).array();
  Eigen::MatrixXd delta;
  if (kind == LossKind::kMse) {
    delta = (2.0 / count) * err * out.array() * (1.0 - out.array());
  } else {
    // sign with sign(0) = 0, matching the MAE subgradient convention.
    Eigen::ArrayXXd sign =
        (err > 0.0).cast<double>() - (err < 0.0).cast<double>();
    delta = (1.0 / count) * sign * out.array() * (1.0 - out.array());
  }

  const std::size_t layers = model.weights.size();
  Gradients grads;
  grads.d_weights.resize(layers);
  grads.d_biases.resize(layers);
  for (std::size_t i = layers; i-- > 0;) {
    grads.d_weights[i].noalias() = delta * acts[i].transpose();
    grads.d_biases[i] = delta.rowwise().sum();
    if (i > 0) {
      Eigen::MatrixXd back = model.weights[i].transpose() * delta;
      // ReLU mask; the subgradient at exactly 0 is 0.
      delta = (acts[i].array() > 0.0).cast<double>() * back.array();
    }
  }
  return grads;
}

MlpModel train(const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_y,
               const Eigen::MatrixXd& val_x, const Eigen::MatrixXd& val_y,
               const TrainConfig& cfg, TrainHistory* history) {
  cfg.validate();
  if (train_x.cols() == 0) throw ValidationError("empty training set");
  if (train_x.cols() != train_y.cols() || val_x.cols() != val_y.cols())
    throw ValidationError("feature/label count mismatch");

  const int num_samples = static_cast<int>(train_x.cols());
  const int k = static_cast<int>(train_y.rows());
  MlpModel model =
      init_model(static_cast<int>(train_x.rows()), cfg.hidden, k, cfg.seed);

  AdamState adam;
  adam.m_weights.resize(model.weights.size());
  adam.v_weights.resize(model.weights.size());
  adam.m_biases.resize(model.weights.size());
  adam.v_biases.resize(model.weights.size());
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    adam.m_weights[i] = Eigen::MatrixXd::Zero(model.weights[i].rows(),
                                              model.weights[i].cols());
    adam.v_weights[i] = adam.m_weights[i];
    adam.m_biases[i] = Eigen::VectorXd::Zero(model.biases[i].size());
    adam.v_biases[i] = adam.m_biases[i];
  }

  // Separate stream for the epoch shuffles so changing the architecture
  // never perturbs the data order.
  Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<int> order(num_samples);
  std::iota(order.begin(), order.end(), 0);

  if (history) {
    history->train_loss.clear();
    history->val_loss.clear();
  }

  Eigen::MatrixXd batch_x(train_x.rows(), cfg.batch_size);
  Eigen::MatrixXd batch_y(k, cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = num_samples - 1; i > 0; --i)
      std::swap(order[i],
                order[static_cast<int>(shuffle_rng.below(i + 1))]);

    for (int start = 0; start < num_samples; start += cfg.batch_size) {
      const int len = std::min(cfg.batch_size, num_samples - start);
      batch_x.resize(Eigen::NoChange, len);
      batch_y.resize(Eigen::NoChange, len);
      for (int j = 0; j < len; ++j) {
        batch_x.col(j) = train_x.col(order[start + j]);
        batch_y.col(j) = train_y.col(order[start + j]);
      }

      const Gradients grads = backward(model, batch_x, batch_y, cfg.loss);
      ++adam.step;
      const double corr1 = 1.0 - std::pow(cfg.adam_beta1,
                                          static_cast<double>(adam.step));
      const double corr2 = 1.0 - std::pow(cfg.adam_beta2,
                                          static_cast<double>(adam.step));
      const double rate = cfg.learning_rate;
      for (std::size_t i = 0; i < model.weights.size(); ++i) {
        auto update = [&](auto& m, auto& v, const auto& g, auto& param) {
          m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
          v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
          param.array() -= rate * (m.array() / corr1) /
                           ((v.array() / corr2).sqrt() + cfg.adam_epsilon);
        };
        update(adam.m_weights[i], adam.v_weights[i], grads.d_weights[i],
               model.weights[i]);
        update(adam.m_biases[i], adam.v_biases[i], grads.d_biases[i],
               model.biases[i]);
      }
    }

    if (history) {
      history->train_loss.push_back(
          loss_value(forward_batch(model, train_x), train_y, cfg.loss));
      history->val_loss.push_back(
          val_x.cols() == 0
              ? 0.0
              : loss_value(forward_batch(model, val_x), val_y, cfg.loss));
    }
  }
  return model;
}

PowerAllocation power_matrix(const Eigen::VectorXd& p_hat,
                             const Eigen::MatrixXcd& bb, double p_total) {
  if ((p_hat.array() <= 0.0).any())
    throw ValidationError("predicted powers must be strictly positive");
  return scale_to_full_power(p_hat, bb, p_total);
}

// --- checkpoint serialization ------------------------------------------

namespace {

constexpr char kModelMagic[8] = {'D', 'L', 'P', 'A', '-', 'M', 'L', 'P'};
constexpr std::uint32_t kModelVersion = 1;

class CrcWriter {
 public:
  explicit CrcWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t len) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(len));
    crc_ = crc32(crc_, static_cast<const Bytef*>(data),
                 static_cast<uInt>(len));
  }
  template <typename T>
  void pod(const T& v) {
    bytes(&v, sizeof v);
  }
  void matrix(const Eigen::MatrixXd& m) {
    // Row-major on disk, independent of in-memory layout.
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) pod(m(r, c));
  }
  void vector(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) pod(v[i]);
  }
  std::uint32_t crc() const { return static_cast<std::uint32_t>(crc_); }

 private:
  std::ostream& out_;
  uLong crc_ = crc32(0L, Z_NULL, 0);
};

class CrcReader {
 public:
  CrcReader(const std::string& buf, const std::string& origin)
      : buf_(buf), origin_(origin) {}

  void bytes(void* data, std::size_t len) {
    if (at_ + len > buf_.size())
      throw IoError("truncated file: " + origin_);
    std::memcpy(data, buf_.data() + at_, len);
    crc_ = crc32(crc_, reinterpret_cast<const Bytef*>(buf_.data() + at_),
                 static_cast<uInt>(len));
    at_ += len;
  }
  template <typename T>
  T pod() {
    T v;
    bytes(&v, sizeof v);
    return v;
  }
  Eigen::MatrixXd matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = pod<double>();
    return m;
  }
  Eigen::VectorXd vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = pod<double>();
    return v;
  }
  std::uint32_t crc() const { return static_cast<std::uint32_t>(crc_); }
  std::size_t position() const { return at_; }
  std::size_t remaining() const { return buf_.size() - at_; }

 private:
  const std::string& buf_;
  std::string origin_;
  std::size_t at_ = 0;
  uLong crc_ = crc32(0L, Z_NULL, 0);
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return buf;
}

}  // namespace

void save_model(const std::filesystem::path& path, const MlpModel& model,
                const AdamState* adam) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  CrcWriter w(out);
  w.bytes(kModelMagic, sizeof kModelMagic);
  w.pod(kModelVersion);
  const auto layers = static_cast<std::uint32_t>(model.weights.size());
  w.pod(layers);
  for (std::uint32_t i = 0; i < layers; ++i) {
    w.pod(static_cast<std::uint32_t>(model.weights[i].cols()));
    w.pod(static_cast<std::uint32_t>(model.weights[i].rows()));
  }
  w.pod(static_cast<std::uint8_t>(adam ? 1 : 0));
  for (std::uint32_t i = 0; i < layers; ++i) {
    w.matrix(model.weights[i]);
    w.vector(model.biases[i]);
  }
  if (adam) {
    w.pod(static_cast<std::uint64_t>(adam->step));
    for (std::uint32_t i = 0; i < layers; ++i) {
      w.matrix(adam->m_weights[i]);
      w.matrix(adam->v_weights[i]);
      w.vector(adam->m_biases[i]);
      w.vector(adam->v_biases[i]);
    }
  }
  const std::uint32_t crc = w.crc();
  out.write(reinterpret_cast<const char*>(&crc), sizeof crc);
  if (!out) throw IoError("failed writing " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  CrcReader r(buf, path.string());

  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0)
    throw IoError("not a model file: " + path.string());
  const auto version = r.pod<std::uint32_t>();
  if (version != kModelVersion)
    throw IoError("unsupported model format version " +
                  std::to_string(version));
  const auto layers = r.pod<std::uint32_t>();
  if (layers == 0 || layers > 64) throw IoError("implausible layer count");

  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(layers);
  for (auto& [in, out] : dims) {
    in = r.pod<std::uint32_t>();
    out = r.pod<std::uint32_t>();
  }
  const bool has_adam = r.pod<std::uint8_t>() != 0;

  LoadedModel loaded;
  for (auto [in, out] : dims) {
    loaded.model.weights.push_back(r.matrix(out, in));
    loaded.model.biases.push_back(r.vector(out));
  }
  if (has_adam) {
    AdamState adam;
    adam.step = r.pod<std::uint64_t>();
    for (auto [in, out] : dims) {
      adam.m_weights.push_back(r.matrix(out, in));
      adam.v_weights.push_back(r.matrix(out, in));
      adam.m_biases.push_back(r.vector(out));
      adam.v_biases.push_back(r.vector(out));
    }
    loaded.adam = std::move(adam);
  }

  const std::uint32_t computed = r.crc();
  const auto stored = r.pod<std::uint32_t>();
  if (stored != computed)
    throw IoError("checksum mismatch in " + path.string());
  if (r.remaining() != 0)
    throw IoError("trailing bytes in " + path.string());
  return loaded;
}

}  // namespace dlpa
