#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddvi/problem.hpp"

namespace ddvi {

enum class Activation { relu, tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct NetArchitecture {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden_widths{32, 32, 32, 32};
  Activation activation = Activation::relu;
  std::size_t output_dim = 1;

  void validate() const;
  /// Sum over layers of (fan_in + 1) * fan_out.
  std::size_t parameter_count() const;
  std::size_t layer_count() const { return hidden_widths.size() + 1; }
  std::size_t fan_in(std::size_t layer) const;
  std::size_t fan_out(std::size_t layer) const;
  /// Offset of layer's weight block inside theta; the bias follows the weights.
  std::size_t offset(std::size_t layer) const;
};

/// Flat parameter vector. Per layer: weights (fan_out x fan_in, row-major)
/// followed by the fan_out biases.
struct NetworkParams {
  NetArchitecture arch;
  std::vector<double> theta;

  void validate() const;
};

/// Glorot-uniform weights, zero biases; deterministic in seed.
NetworkParams init_params(const NetArchitecture& arch, std::uint64_t seed);

double forward(const NetworkParams& p, Point x);

struct ValueAndGradient {
  double u = 0.0;
  double u_x = 0.0;
  double u_y = 0.0;
};

ValueAndGradient forward_with_input_grad(const NetworkParams& p, Point x);

/// Network outputs over a batch of points. u_x/u_y are empty unless the input
/// gradient was requested.
struct BatchOutput {
  Eigen::VectorXd u;
  Eigen::VectorXd u_x;
  Eigen::VectorXd u_y;
};

BatchOutput evaluate_batch(const NetworkParams& p, std::span<const Point> pts,
                           bool input_grad);

/// Thrown when a loss (or one of its terms) evaluates to inf/nan.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(std::string term, double value);
  const std::string& term() const { return term_; }
  double value() const { return value_; }

 private:
  std::string term_;
  double value_;
};

/// One recorded forward sweep over a batch. The loss closure reads the
/// outputs and writes dLoss/d(output) into the matching seed vectors.
class TapeBatch {
 public:
  const Eigen::VectorXd& u() const { return out_.u; }
  const Eigen::VectorXd& u_x() const { return out_.u_x; }
  const Eigen::VectorXd& u_y() const { return out_.u_y; }
  bool has_input_grad() const { return input_grad_; }
  std::size_t size() const { return static_cast<std::size_t>(out_.u.size()); }

  Eigen::VectorXd seed_u;
  Eigen::VectorXd seed_u_x;
  Eigen::VectorXd seed_u_y;

 private:
  friend class GradientTape;
  struct Layer {
    Eigen::MatrixXd input;    // activations entering the layer
    Eigen::MatrixXd tin_x;    // tangents entering the layer
    Eigen::MatrixXd tin_y;
    Eigen::MatrixXd act;      // sigma(z), hidden layers only
    Eigen::MatrixXd slope;    // sigma'(z)
    Eigen::MatrixXd lin_x;    // W * tin_x
    Eigen::MatrixXd lin_y;
  };
  bool input_grad_ = false;
  BatchOutput out_;
  std::vector<Layer> layers_;
};

/// Reverse accumulation over theta for losses built from network outputs and
/// their input gradients (forward-mode in x, y nested inside).
class GradientTape {
 public:
  explicit GradientTape(const NetworkParams& p) : params_(p) {}

  TapeBatch& record(std::span<const Point> pts, bool input_grad);
  const NetworkParams& params() const { return params_; }

  /// Adds dLoss/dtheta for every recorded batch into grad.
  void backward(std::span<double> grad) const;

 private:
  const NetworkParams& params_;
  std::deque<TapeBatch> batches_;
};

using LossClosure = std::function<double(GradientTape&)>;

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Evaluates the closure on a fresh tape and back-propagates its seeds.
/// Throws NonFiniteLoss when the closure's value is not finite.
LossAndGradient param_gradient(const NetworkParams& p, const LossClosure& loss);

/// First/second moments and step counter for Adam.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(std::size_t n, double lr = 1e-3);
};

/// Bias-corrected Adam update of p.theta in place; increments s.t.
void adam_step(AdamState& s, NetworkParams& p, std::span<const double> g);

}  // namespace ddvi
