#include "dynoprior/coordnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "dynoprior/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace dyno {

ActivationKind activation_from_string(const std::string& name) {
  if (name == "sinc") return ActivationKind::Sinc;
  if (name == "gaussian") return ActivationKind::Gaussian;
  if (name == "sine") return ActivationKind::Sine;
  if (name == "relu") return ActivationKind::Relu;
  throw Error("unknown activation '" + name + "'");
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sinc: return "sinc";
    case ActivationKind::Gaussian: return "gaussian";
    case ActivationKind::Sine: return "sine";
    case ActivationKind::Relu: return "relu";
  }
  return "?";
}

double Activation::value(double z) const {
  switch (kind) {
    case ActivationKind::Sinc: {
      const double u = omega * z;
      // Taylor branch keeps the removable singularity smooth in doubles.
      if (std::abs(u) < 1e-4) return 1.0 - u * u / 6.0;
      return std::sin(u) / u;
    }
    case ActivationKind::Gaussian:
      return std::exp(-z * z / (omega * omega));
    case ActivationKind::Sine:
      return std::sin(omega * z);
    case ActivationKind::Relu:
      return z > 0 ? z : 0.0;
  }
  return 0.0;
}

double Activation::deriv(double z) const {
  switch (kind) {
    case ActivationKind::Sinc: {
      const double u = omega * z;
      if (std::abs(u) < 1e-4) return -omega * omega * z / 3.0;
      return omega * (std::cos(u) / u - std::sin(u) / (u * u));
    }
    case ActivationKind::Gaussian:
      return (-2.0 * z / (omega * omega)) * std::exp(-z * z / (omega * omega));
    case ActivationKind::Sine:
      return omega * std::cos(omega * z);
    case ActivationKind::Relu:
      return z > 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

void Activation::apply(Eigen::MatrixXd& z) const {
  const double* end = z.data() + z.size();
  for (double* p = z.data(); p != end; ++p) *p = value(*p);
}

Eigen::MatrixXd Activation::derivative(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd d(z.rows(), z.cols());
  const double* src = z.data();
  double* dst = d.data();
  for (Eigen::Index i = 0; i < z.size(); ++i) dst[i] = deriv(src[i]);
  return d;
}

std::vector<int> Network::widths() const {
  std::vector<int> w;
  w.push_back(input_dim());
  for (const auto& m : weights) w.push_back(int(m.rows()));
  return w;
}

Eigen::MatrixXd Network::normalize_inputs(const Eigen::MatrixXd& x) const {
  return (x.colwise() - input_shift).array().colwise() * input_scale.array();
}

Network init(const std::vector<int>& widths, const Activation& activation,
             std::uint64_t seed) {
  if (widths.size() < 2) throw Error("init: need at least two widths");
  for (int w : widths) {
    if (w < 1) throw Error("init: widths must be positive");
  }
  Network net;
  net.activation = activation;
  SplitMix64 rng(seed);
  for (size_t l = 1; l < widths.size(); ++l) {
    const int rows = widths[l], cols = widths[l - 1];
    const double lim = std::sqrt(6.0 / double(cols));
    Eigen::MatrixXd w(rows, cols);
    // Row-major draw order; part of the determinism contract.
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-lim, lim);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  net.input_shift = Eigen::VectorXd::Zero(widths[0]);
  net.input_scale = Eigen::VectorXd::Ones(widths[0]);
  return net;
}

void fit_input_normalization(Network& net, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw Error("fit_input_normalization: input dimension mismatch");
  }
  const Eigen::VectorXd lo = inputs.rowwise().minCoeff();
  const Eigen::VectorXd hi = inputs.rowwise().maxCoeff();
  net.input_shift = 0.5 * (lo + hi);
  net.input_scale.resize(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const double span = hi[i] - lo[i];
    net.input_scale[i] = span > 0 ? 2.0 / span : 1.0;
  }
}

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> post;  // post[l] = f_l batch, post[0] normalized inputs
  std::vector<Eigen::MatrixXd> pre;   // pre[l] = W_{l+1} f_l + b_{l+1}
};

ForwardCache forward_cached(const Network& net, const Eigen::MatrixXd& x) {
  ForwardCache c;
  const int L = net.layers();
  c.post.reserve(size_t(L) + 1);
  c.pre.reserve(size_t(L));
  c.post.push_back(net.normalize_inputs(x));
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z =
        (net.weights[size_t(l)] * c.post.back()).colwise() + net.biases[size_t(l)];
    c.pre.push_back(z);
    if (l + 1 < L) net.activation.apply(z);
    c.post.push_back(std::move(z));
  }
  return c;
}

}  // namespace

Eigen::MatrixXd forward_batch(const Network& net, const Eigen::MatrixXd& x) {
  if (x.rows() != net.input_dim()) throw Error("forward: input dimension mismatch");
  const int L = net.layers();
  Eigen::MatrixXd h = net.normalize_inputs(x);
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = (net.weights[size_t(l)] * h).colwise() + net.biases[size_t(l)];
    if (l + 1 < L) net.activation.apply(z);
    h = std::move(z);
  }
  return h;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x) {
  return forward_batch(net, x);
}

Eigen::MatrixXd jacobian_t(const Network& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim()) throw Error("jacobian_t: input dimension mismatch");
  const int L = net.layers();
  // Chained diagonal product J = W_L D_{L-1} W_{L-1} ... D_1 W_1 S, with S
  // the input-normalization scale.
  Eigen::MatrixXd h = net.normalize_inputs(x);
  Eigen::MatrixXd jac =
      net.weights[0] * net.input_scale.asDiagonal().toDenseMatrix();
  for (int l = 0; l < L - 1; ++l) {
    Eigen::MatrixXd z = (net.weights[size_t(l)] * h).colwise() + net.biases[size_t(l)];
    const Eigen::MatrixXd d = net.activation.derivative(z);
    net.activation.apply(z);
    h = std::move(z);
    jac = net.weights[size_t(l) + 1] * (d.col(0).asDiagonal() * jac);
  }
  return jac;
}

Eigen::MatrixXd penultimate_features(const Network& net,
                                     const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw Error("penultimate_features: input dimension mismatch");
  }
  const int L = net.layers();
  Eigen::MatrixXd h = net.normalize_inputs(inputs);
  for (int l = 0; l + 1 < L; ++l) {
    Eigen::MatrixXd z = (net.weights[size_t(l)] * h).colwise() + net.biases[size_t(l)];
    net.activation.apply(z);
    h = std::move(z);
  }
  return h.transpose();
}

namespace {

LossGrad backprop(const Network& net, const ForwardCache& cache,
                  const Eigen::MatrixXd& targets) {
  const int L = net.layers();
  LossGrad g;
  g.weight_grads.resize(size_t(L));
  g.bias_grads.resize(size_t(L));
  const Eigen::MatrixXd err = cache.post.back() - targets;
  const double entries = double(err.rows()) * double(err.cols());
  g.loss = err.squaredNorm() / entries;
  Eigen::MatrixXd delta = (2.0 / entries) * err;
  for (int l = L - 1; l >= 0; --l) {
    g.weight_grads[size_t(l)] = delta * cache.post[size_t(l)].transpose();
    g.bias_grads[size_t(l)] = delta.rowwise().sum();
    if (l > 0) {
      delta = (net.weights[size_t(l)].transpose() * delta).cwiseProduct(
          net.activation.derivative(cache.pre[size_t(l) - 1]));
    }
  }
  return g;
}

}  // namespace

LossGrad mse_gradients(const Network& net, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets) {
  return backprop(net, forward_cached(net, inputs), targets);
}

TrainResult train(const Network& net, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& cfg) {
  if (inputs.cols() != targets.cols()) {
    throw Error("train: inputs and targets disagree on sample count");
  }
  if (inputs.rows() != net.input_dim() || targets.rows() != net.output_dim()) {
    throw Error("train: data dimensions do not match the network");
  }
  if (cfg.iterations < 1) throw Error("train: iterations must be positive");
  if (cfg.learning_rate <= 0) throw Error("train: learning rate must be positive");

  TrainResult result;
  result.network = net;
  Network& w = result.network;
  const int L = w.layers();
  const Eigen::Index n = inputs.cols();
  const bool full_batch = cfg.batch <= 0 || Eigen::Index(cfg.batch) >= n;

  std::vector<Eigen::MatrixXd> m_w(size_t(L)), v_w(size_t(L));
  std::vector<Eigen::VectorXd> m_b(size_t(L)), v_b(size_t(L));
  for (int l = 0; l < L; ++l) {
    m_w[size_t(l)] = Eigen::MatrixXd::Zero(w.weights[size_t(l)].rows(),
                                           w.weights[size_t(l)].cols());
    v_w[size_t(l)] = m_w[size_t(l)];
    m_b[size_t(l)] = Eigen::VectorXd::Zero(w.biases[size_t(l)].size());
    v_b[size_t(l)] = m_b[size_t(l)];
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  auto full_mse = [&](const Network& candidate) {
    const Eigen::MatrixXd err = forward_batch(candidate, inputs) - targets;
    return err.squaredNorm() / (double(err.rows()) * double(err.cols()));
  };

  std::vector<Eigen::MatrixXd> best_w = w.weights;
  std::vector<Eigen::VectorXd> best_b = w.biases;
  double best_loss = full_mse(w);
  result.loss_history.push_back(best_loss);

  SplitMix64 rng(cfg.seed);
  Eigen::MatrixXd batch_in, batch_tg;
  const double decay =
      cfg.final_lr_fraction < 1.0 && cfg.iterations > 1
          ? std::pow(cfg.final_lr_fraction, 1.0 / double(cfg.iterations - 1))
          : 1.0;
  double lr = cfg.learning_rate;

  for (int it = 1; it <= cfg.iterations; ++it) {
    const Eigen::MatrixXd* in = &inputs;
    const Eigen::MatrixXd* tg = &targets;
    if (!full_batch) {
      batch_in.resize(inputs.rows(), cfg.batch);
      batch_tg.resize(targets.rows(), cfg.batch);
      for (int j = 0; j < cfg.batch; ++j) {
        const auto col = Eigen::Index(rng.next_below(std::uint64_t(n)));
        batch_in.col(j) = inputs.col(col);
        batch_tg.col(j) = targets.col(col);
      }
      in = &batch_in;
      tg = &batch_tg;
    }

    const LossGrad g = backprop(w, forward_cached(w, *in), *tg);
    if (!std::isfinite(g.loss)) {
      throw TrainingDivergedError(
          "training loss became non-finite at iteration " + std::to_string(it),
          it);
    }
    if (full_batch && g.loss < best_loss) {
      best_loss = g.loss;
      best_w = w.weights;
      best_b = w.biases;
    }

    const double c1 = 1.0 - std::pow(kBeta1, double(it));
    const double c2 = 1.0 - std::pow(kBeta2, double(it));
    for (int l = 0; l < L; ++l) {
      auto& gw = g.weight_grads[size_t(l)];
      auto& gb = g.bias_grads[size_t(l)];
      m_w[size_t(l)] = kBeta1 * m_w[size_t(l)] + (1 - kBeta1) * gw;
      v_w[size_t(l)] = kBeta2 * v_w[size_t(l)] + (1 - kBeta2) * gw.cwiseProduct(gw);
      m_b[size_t(l)] = kBeta1 * m_b[size_t(l)] + (1 - kBeta1) * gb;
      v_b[size_t(l)] = kBeta2 * v_b[size_t(l)] + (1 - kBeta2) * gb.cwiseProduct(gb);
      w.weights[size_t(l)].array() -=
          lr * (m_w[size_t(l)] / c1).array() /
          ((v_w[size_t(l)] / c2).array().sqrt() + kEps);
      w.biases[size_t(l)].array() -=
          lr * (m_b[size_t(l)] / c1).array() /
          ((v_b[size_t(l)] / c2).array().sqrt() + kEps);
    }
    lr *= decay;

    if (cfg.loss_log_stride > 0 && it % cfg.loss_log_stride == 0) {
      const double mse = full_batch ? g.loss : full_mse(w);
      result.loss_history.push_back(mse);
      if (!full_batch && mse < best_loss) {
        best_loss = mse;
        best_w = w.weights;
        best_b = w.biases;
      }
    }
  }

  const double last = full_mse(w);
  if (last < best_loss) {
    best_loss = last;
  } else {
    w.weights = best_w;
    w.biases = best_b;
  }
  result.final_loss = best_loss;
  return result;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kMagic[4] = {'D', 'Y', 'N', 'O'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::vector<std::uint8_t>& out, const void* src, size_t count) {
  const auto* p = static_cast<const std::uint8_t*>(src);
  out.insert(out.end(), p, p + count);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  put_bytes(out, &value, sizeof(T));
}

struct Reader {
  const std::vector<std::uint8_t>& bytes;
  size_t pos = 0;

  void read(void* dst, size_t count) {
    if (pos + count > bytes.size()) {
      throw SerializationError("network byte stream truncated at offset " +
                               std::to_string(pos));
    }
    std::memcpy(dst, bytes.data() + pos, count);
    pos += count;
  }
  template <typename T>
  T get() {
    T value;
    read(&value, sizeof(T));
    return value;
  }
};

}  // namespace

std::vector<std::uint8_t> save(const Network& net) {
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(net.activation.kind));
  put<double>(out, net.activation.omega);
  put<std::uint32_t>(out, std::uint32_t(net.layers()));
  for (int l = 0; l < net.layers(); ++l) {
    const auto& w = net.weights[size_t(l)];
    put<std::uint32_t>(out, std::uint32_t(w.rows()));
    put<std::uint32_t>(out, std::uint32_t(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) put<double>(out, w(i, j));
    }
    const auto& b = net.biases[size_t(l)];
    for (Eigen::Index i = 0; i < b.size(); ++i) put<double>(out, b[i]);
  }
  // One (shift, scale) pair per input dimension.
  for (Eigen::Index i = 0; i < net.input_shift.size(); ++i) {
    put<double>(out, net.input_shift[i]);
    put<double>(out, net.input_scale[i]);
  }
  return out;
}

Network load(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw SerializationError("bad magic; not a DYNO network file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw SerializationError("unsupported format version " +
                             std::to_string(version));
  }
  Network net;
  const auto tag = r.get<std::uint8_t>();
  if (tag > 3) throw SerializationError("unknown activation tag");
  net.activation.kind = static_cast<ActivationKind>(tag);
  net.activation.omega = r.get<double>();
  const auto layers = r.get<std::uint32_t>();
  if (layers < 1 || layers > 1024) {
    throw SerializationError("implausible layer count");
  }
  std::uint32_t prev_rows = 0;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (rows < 1 || cols < 1 || rows > (1u << 20) || cols > (1u << 20)) {
      throw SerializationError("implausible layer shape");
    }
    if (l > 0 && cols != prev_rows) {
      throw SerializationError("layer shapes are inconsistent");
    }
    prev_rows = rows;
    Eigen::MatrixXd w(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) w(i, j) = r.get<double>();
    }
    Eigen::VectorXd b(rows);
    for (std::uint32_t i = 0; i < rows; ++i) b[i] = r.get<double>();
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  const auto n0 = Eigen::Index(net.weights.front().cols());
  net.input_shift.resize(n0);
  net.input_scale.resize(n0);
  for (Eigen::Index i = 0; i < n0; ++i) {
    net.input_shift[i] = r.get<double>();
    net.input_scale[i] = r.get<double>();
  }
  if (r.pos != bytes.size()) {
    throw SerializationError("trailing bytes after network payload");
  }
  return net;
}

void save_file(const Network& net, const std::string& path) {
  const auto bytes = save(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
}

Network load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load(bytes);
}

}  // namespace dyno
