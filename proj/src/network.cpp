#include "avam/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace avam {

QNetwork::QNetwork(int input, std::vector<int> hidden, std::vector<int> heads)
    : input_(input), hidden_(std::move(hidden)), heads_(std::move(heads)) {
  if (input_ <= 0 || heads_.empty()) throw std::invalid_argument("network needs input and heads");
  for (int h : heads_) {
    if (h <= 0) throw std::invalid_argument("head sizes must be positive");
    head_offsets_.push_back(head_offsets_.back() + h);
  }
  int prev = input_;
  std::vector<int> sizes = hidden_;
  sizes.push_back(output_size());
  for (int n : sizes) {
    if (n <= 0) throw std::invalid_argument("layer sizes must be positive");
    weights.push_back(Eigen::MatrixXd::Zero(n, prev));
    biases.push_back(Eigen::VectorXd::Zero(n));
    prev = n;
  }
}

void QNetwork::init(std::uint64_t seed, double output_scale) {
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const double fan_in = static_cast<double>(weights[l].cols());
    const bool last = l + 1 == weights.size();
    const double bound = last ? output_scale / std::sqrt(fan_in) : std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    // column-major fill keeps the draw order tied to the storage order
    double* w = weights[l].data();
    for (Eigen::Index i = 0; i < weights[l].size(); ++i) w[i] = dist(rng);
    biases[l].setZero();
  }
}

void QNetwork::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

std::size_t QNetwork::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::MatrixXd QNetwork::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_) throw std::invalid_argument("input size does not match the network");
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::MatrixXd z = weights[l] * a;
    z.colwise() += biases[l];
    if (l + 1 < weights.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

std::vector<double> QNetwork::flat() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.insert(out.end(), weights[l].data(), weights[l].data() + weights[l].size());
    out.insert(out.end(), biases[l].data(), biases[l].data() + biases[l].size());
  }
  return out;
}

void QNetwork::set_flat(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].size(); ++i) weights[l].data()[i] = params[k++];
    for (Eigen::Index i = 0; i < biases[l].size(); ++i) biases[l][i] = params[k++];
  }
}

bool QNetwork::finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const QNetwork& net) {
  Gradients g;
  for (int l = 0; l < net.layer_count(); ++l) {
    g.d_weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.d_biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    d_weights[l] += other.d_weights[l];
    d_biases[l] += other.d_biases[l];
  }
  return *this;
}

std::vector<double> Gradients::flat() const {
  std::vector<double> out;
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    out.insert(out.end(), d_weights[l].data(), d_weights[l].data() + d_weights[l].size());
    out.insert(out.end(), d_biases[l].data(), d_biases[l].data() + d_biases[l].size());
  }
  return out;
}

namespace {

void check_batch(const QNetwork& net, const QRegressionBatch& batch) {
  const auto n = batch.inputs.cols();
  if (n == 0) throw std::invalid_argument("empty batch");
  if (batch.inputs.rows() != net.input_size() || batch.targets.size() != n ||
      batch.actions.cols() != n ||
      batch.actions.rows() != static_cast<Eigen::Index>(net.heads().size())) {
    throw std::invalid_argument("batch shape does not match the network");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index h = 0; h < batch.actions.rows(); ++h) {
      const int a = batch.actions(h, i);
      if (a < 0 || a >= net.heads()[h]) throw std::out_of_range("action index outside its head");
    }
  }
}

// Forward + backward over columns [begin, begin + count) of the batch; the
// weight gradients are assigned (not accumulated) into g.
double chunk_gradient(const QNetwork& net, const QRegressionBatch& batch, Eigen::Index begin,
                      Eigen::Index count, double scale, Gradients& g) {
  const int layers = net.layer_count();
  const auto x = batch.inputs.middleCols(begin, count);
  std::vector<Eigen::MatrixXd> acts(layers);  // acts[l] = output of layer l
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = l == 0 ? Eigen::MatrixXd(net.weights[0] * x)
                               : Eigen::MatrixXd(net.weights[l] * acts[l - 1]);
    z.colwise() += net.biases[l];
    if (l + 1 < layers) z = z.cwiseMax(0.0);
    acts[l] = std::move(z);
  }
  const Eigen::MatrixXd& out = acts[layers - 1];
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), count);
  double loss = 0.0;
  const auto heads = static_cast<int>(net.heads().size());
  for (Eigen::Index i = 0; i < count; ++i) {
    double q = 0.0;
    for (int h = 0; h < heads; ++h) q += out(net.head_offset(h) + batch.actions(h, begin + i), i);
    const double r = q - batch.targets[begin + i];
    loss += r * r;
    for (int h = 0; h < heads; ++h) {
      delta(net.head_offset(h) + batch.actions(h, begin + i), i) += scale * 2.0 * r;
    }
  }
  for (int l = layers - 1; l >= 0; --l) {
    if (l == 0) {
      g.d_weights[0].noalias() = delta * x.transpose();
    } else {
      g.d_weights[l].noalias() = delta * acts[l - 1].transpose();
    }
    g.d_biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = net.weights[l].transpose() * delta;
    delta = back.cwiseProduct((acts[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

bool same_shape(const Gradients& g, const QNetwork& net) {
  if (static_cast<int>(g.d_weights.size()) != net.layer_count()) return false;
  for (int l = 0; l < net.layer_count(); ++l) {
    if (g.d_weights[l].rows() != net.weights[l].rows() ||
        g.d_weights[l].cols() != net.weights[l].cols()) {
      return false;
    }
  }
  return true;
}

}  // namespace

double q_regression_gradient(const QNetwork& net, const QRegressionBatch& batch,
                             Gradients& grad, Exec exec, int chunk) {
  check_batch(net, batch);
  if (chunk < 1) throw std::invalid_argument("chunk size must be positive");
  const Eigen::Index n = batch.inputs.cols();
  const double scale = 1.0 / static_cast<double>(n);
  const auto chunks = static_cast<int>((n + chunk - 1) / chunk);
  if (!same_shape(grad, net)) grad = Gradients::zeros_like(net);
  if (chunks == 1) return chunk_gradient(net, batch, 0, n, scale, grad) * scale;

  // Per-chunk buffers are kept across calls; large temporaries otherwise
  // dominate the update through page faults.
  thread_local std::vector<Gradients> workspace;
  std::vector<Gradients>& parts = workspace;  // the caller's instance, also inside workers
  if (static_cast<int>(parts.size()) < chunks || !same_shape(parts[0], net)) {
    parts.assign(chunks, Gradients::zeros_like(net));
  }
  std::vector<double> losses(chunks, 0.0);
  auto body = [&](int c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * chunk;
    const Eigen::Index count = std::min<Eigen::Index>(chunk, n - begin);
    losses[c] = chunk_gradient(net, batch, begin, count, scale, parts[c]);
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) body(c);
  } else {
    for (int c = 0; c < chunks; ++c) body(c);
  }
  double loss = losses[0];
  for (int l = 0; l < net.layer_count(); ++l) {
    grad.d_weights[l] = parts[0].d_weights[l];
    grad.d_biases[l] = parts[0].d_biases[l];
  }
  for (int c = 1; c < chunks; ++c) {
    grad += parts[c];
    loss += losses[c];
  }
  return loss * scale;
}

double q_regression_gradient_reference(const QNetwork& net, const QRegressionBatch& batch,
                                       Gradients& grad) {
  check_batch(net, batch);
  grad = Gradients::zeros_like(net);
  const int layers = net.layer_count();
  const Eigen::Index n = batch.inputs.cols();
  const double scale = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    std::vector<std::vector<double>> acts(layers + 1);
    acts[0].assign(batch.inputs.col(s).data(), batch.inputs.col(s).data() + net.input_size());
    for (int l = 0; l < layers; ++l) {
      const auto& w = net.weights[l];
      acts[l + 1].assign(w.rows(), 0.0);
      for (Eigen::Index o = 0; o < w.rows(); ++o) {
        double z = net.biases[l][o];
        for (Eigen::Index i = 0; i < w.cols(); ++i) z += w(o, i) * acts[l][i];
        acts[l + 1][o] = (l + 1 < layers && z < 0.0) ? 0.0 : z;
      }
    }
    double q = 0.0;
    for (std::size_t h = 0; h < net.heads().size(); ++h) {
      q += acts[layers][net.head_offset(h) + batch.actions(h, s)];
    }
    const double r = q - batch.targets[s];
    loss += r * r;
    std::vector<double> delta(net.output_size(), 0.0);
    for (std::size_t h = 0; h < net.heads().size(); ++h) {
      delta[net.head_offset(h) + batch.actions(h, s)] += scale * 2.0 * r;
    }
    for (int l = layers - 1; l >= 0; --l) {
      const auto& w = net.weights[l];
      for (Eigen::Index o = 0; o < w.rows(); ++o) {
        grad.d_biases[l][o] += delta[o];
        for (Eigen::Index i = 0; i < w.cols(); ++i) grad.d_weights[l](o, i) += delta[o] * acts[l][i];
      }
      if (l == 0) break;
      std::vector<double> back(w.cols(), 0.0);
      for (Eigen::Index i = 0; i < w.cols(); ++i) {
        double sum = 0.0;
        for (Eigen::Index o = 0; o < w.rows(); ++o) sum += w(o, i) * delta[o];
        back[i] = acts[l][i] > 0.0 ? sum : 0.0;
      }
      delta = std::move(back);
    }
  }
  return loss * scale;
}

Adam::Adam(const QNetwork& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Gradients::zeros_like(net)), v_(Gradients::zeros_like(net)) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void Adam::step(QNetwork& net, const Gradients& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double a1 = 1.0 - beta1_;
  const double a2 = 1.0 - beta2_;
  // One fused pass; the buffers are too large for separate expression passes.
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    double* __restrict p = param.data();
    const double* __restrict gp = g.data();
    double* __restrict mp = m.data();
    double* __restrict vp = v.data();
    const Eigen::Index n = param.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      mp[i] = beta1_ * mp[i] + a1 * gp[i];
      vp[i] = beta2_ * vp[i] + a2 * (gp[i] * gp[i]);
      p[i] -= lr_ * (mp[i] / c1) / (std::sqrt(vp[i] / c2) + eps_);
    }
  };
  for (int l = 0; l < net.layer_count(); ++l) {
    update(net.weights[l], grad.d_weights[l], m_.d_weights[l], v_.d_weights[l]);
    update(net.biases[l], grad.d_biases[l], m_.d_biases[l], v_.d_biases[l]);
  }
}

}  // namespace avam
