#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "avam/voxel.hpp"

namespace avam {

/// Multi-layer perceptron with rectifier hidden layers and a linear output
/// that is split into consecutive heads.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(int input, std::vector<int> hidden, std::vector<int> heads);

  /// Uniform fan-in scaled weights, zero biases, deterministic in `seed`.
  /// The output layer is drawn with bound output_scale / sqrt(fan_in); at
  /// the default 0 an action's head row only moves once that action has been
  /// trained on, so untried actions keep Q = 0.
  void init(std::uint64_t seed, double output_scale = 0.0);
  void set_zero();

  int input_size() const { return input_; }
  int output_size() const { return head_offsets_.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  const std::vector<int>& hidden() const { return hidden_; }
  const std::vector<int>& heads() const { return heads_; }
  int head_offset(int h) const { return head_offsets_[h]; }
  std::size_t parameter_count() const;

  /// Columns of X are samples. Throws std::invalid_argument on a row mismatch.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  std::vector<double> flat() const;
  void set_flat(std::span<const double> params);
  bool finite() const;

  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;

 private:
  int input_ = 0;
  std::vector<int> hidden_;
  std::vector<int> heads_;
  std::vector<int> head_offsets_{0};
};

struct Gradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;

  static Gradients zeros_like(const QNetwork& net);
  Gradients& operator+=(const Gradients& other);
  std::vector<double> flat() const;
};

/// Squared-error regression of summed head entries onto targets:
///   Q_i = sum_h out[offset_h + actions(h, i)],  loss = mean_i (Q_i - y_i)^2.
struct QRegressionBatch {
  Eigen::MatrixXd inputs;     // input x B
  Eigen::MatrixXi actions;    // heads x B
  Eigen::VectorXd targets;    // B
};

/// Loss and gradient, computed over fixed chunks of `chunk` samples that are
/// reduced in chunk order; kParallel spreads chunks over OpenMP threads with
/// bit-identical results.
double q_regression_gradient(const QNetwork& net, const QRegressionBatch& batch,
                             Gradients& grad, Exec exec = Exec::kParallel, int chunk = 8);

/// Per-sample scalar-loop reference of q_regression_gradient.
double q_regression_gradient_reference(const QNetwork& net, const QRegressionBatch& batch,
                                       Gradients& grad);

class Adam {
 public:
  Adam() = default;
  Adam(const QNetwork& net, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(QNetwork& net, const Gradients& grad);
  long long steps() const { return t_; }

 private:
  double lr_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long long t_ = 0;
  Gradients m_;
  Gradients v_;
};

}  // namespace avam
