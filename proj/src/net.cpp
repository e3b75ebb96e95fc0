#include "ddvi/net.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ddvi {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Owned copies rather than maps into theta: Eigen peels unaligned heads off
// vectorised reductions, so maps would make the summation order (and the last
// bits of every result) depend on where theta happens to be allocated.
struct LayerView {
  RowMat w;
  Eigen::VectorXd b;
};

LayerView layer_view(const NetworkParams& p, std::size_t l) {
  const auto fi = static_cast<Eigen::Index>(p.arch.fan_in(l));
  const auto fo = static_cast<Eigen::Index>(p.arch.fan_out(l));
  const double* base = p.theta.data() + p.arch.offset(l);
  return {Eigen::Map<const RowMat>(base, fo, fi), Eigen::Map<const Eigen::VectorXd>(base + fo * fi, fo)};
}

Eigen::MatrixXd input_matrix(std::span<const Point> pts) {
  Eigen::MatrixXd x(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
      throw std::invalid_argument("network input is not finite");
    }
    x(0, static_cast<Eigen::Index>(i)) = pts[i].x;
    x(1, static_cast<Eigen::Index>(i)) = pts[i].y;
  }
  return x;
}

void activate(Activation a, const Eigen::MatrixXd& z, Eigen::MatrixXd& act,
              Eigen::MatrixXd* slope) {
  if (a == Activation::relu) {
    act = z.cwiseMax(0.0);
    // Subgradient 0 at exactly-zero pre-activations.
    if (slope) *slope = (z.array() > 0.0).cast<double>().matrix();
  } else {
    act = z.array().tanh().matrix();
    if (slope) *slope = (1.0 - act.array().square()).matrix();
  }
}

}  // namespace

const char* to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void NetArchitecture::validate() const {
  if (input_dim != 2) throw std::invalid_argument("NetArchitecture: input_dim must be 2");
  if (output_dim != 1) throw std::invalid_argument("NetArchitecture: output_dim must be 1");
  if (hidden_widths.empty()) {
    throw std::invalid_argument("NetArchitecture: at least one hidden layer is required");
  }
  for (auto w : hidden_widths) {
    if (w == 0) throw std::invalid_argument("NetArchitecture: widths must be >= 1");
  }
}

std::size_t NetArchitecture::fan_in(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

std::size_t NetArchitecture::fan_out(std::size_t layer) const {
  return layer < hidden_widths.size() ? hidden_widths[layer] : output_dim;
}

std::size_t NetArchitecture::offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += (fan_in(l) + 1) * fan_out(l);
  return off;
}

std::size_t NetArchitecture::parameter_count() const { return offset(layer_count()); }

void NetworkParams::validate() const {
  arch.validate();
  if (theta.size() != arch.parameter_count()) {
    throw std::invalid_argument("NetworkParams: theta length does not match architecture");
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw std::invalid_argument("NetworkParams: non-finite parameter");
  }
}

NetworkParams init_params(const NetArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  NetworkParams p{arch, std::vector<double>(arch.parameter_count(), 0.0)};
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const auto fi = arch.fan_in(l);
    const auto fo = arch.fan_out(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(fi + fo));
    std::uniform_real_distribution<double> dist(-limit, limit);
    double* w = p.theta.data() + arch.offset(l);
    for (std::size_t i = 0; i < fi * fo; ++i) w[i] = dist(rng);
  }
  return p;
}

BatchOutput evaluate_batch(const NetworkParams& p, std::span<const Point> pts,
                           bool input_grad) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd a = input_matrix(pts);
  Eigen::MatrixXd tx, ty;
  if (input_grad) {
    tx = Eigen::MatrixXd::Zero(2, n);
    ty = Eigen::MatrixXd::Zero(2, n);
    tx.row(0).setOnes();
    ty.row(1).setOnes();
  }
  const std::size_t last = p.arch.layer_count() - 1;
  Eigen::MatrixXd z, slope;
  for (std::size_t l = 0; l <= last; ++l) {
    const auto lv = layer_view(p, l);
    z.noalias() = lv.w * a;
    z.colwise() += lv.b;
    if (l == last) {
      BatchOutput out;
      out.u = z.row(0).transpose();
      if (input_grad) {
        out.u_x = (lv.w * tx).row(0).transpose();
        out.u_y = (lv.w * ty).row(0).transpose();
      }
      return out;
    }
    activate(p.arch.activation, z, a, input_grad ? &slope : nullptr);
    if (input_grad) {
      Eigen::MatrixXd nx = slope.cwiseProduct(lv.w * tx);
      Eigen::MatrixXd ny = slope.cwiseProduct(lv.w * ty);
      tx.swap(nx);
      ty.swap(ny);
    }
  }
  return {};
}

double forward(const NetworkParams& p, Point x) {
  const Point pts[1] = {x};
  return evaluate_batch(p, pts, false).u(0);
}

ValueAndGradient forward_with_input_grad(const NetworkParams& p, Point x) {
  const Point pts[1] = {x};
  const auto out = evaluate_batch(p, pts, true);
  return {out.u(0), out.u_x(0), out.u_y(0)};
}

NonFiniteLoss::NonFiniteLoss(std::string term, double value)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "non-finite loss in term '" << term << "' (value " << value << ")";
        return os.str();
      }()),
      term_(std::move(term)),
      value_(value) {}

TapeBatch& GradientTape::record(std::span<const Point> pts, bool input_grad) {
  const auto& p = params_;
  const auto n = static_cast<Eigen::Index>(pts.size());
  TapeBatch& tb = batches_.emplace_back();
  tb.input_grad_ = input_grad;
  const std::size_t nl = p.arch.layer_count();
  tb.layers_.resize(nl);

  tb.layers_[0].input = input_matrix(pts);
  if (input_grad) {
    tb.layers_[0].tin_x = Eigen::MatrixXd::Zero(2, n);
    tb.layers_[0].tin_y = Eigen::MatrixXd::Zero(2, n);
    tb.layers_[0].tin_x.row(0).setOnes();
    tb.layers_[0].tin_y.row(1).setOnes();
  }
  Eigen::MatrixXd z;
  for (std::size_t l = 0; l < nl; ++l) {
    auto& L = tb.layers_[l];
    const auto lv = layer_view(p, l);
    z.noalias() = lv.w * L.input;
    z.colwise() += lv.b;
    if (input_grad) {
      L.lin_x.noalias() = lv.w * L.tin_x;
      L.lin_y.noalias() = lv.w * L.tin_y;
    }
    if (l + 1 == nl) {
      tb.out_.u = z.row(0).transpose();
      if (input_grad) {
        tb.out_.u_x = L.lin_x.row(0).transpose();
        tb.out_.u_y = L.lin_y.row(0).transpose();
      }
      break;
    }
    auto& next = tb.layers_[l + 1];
    activate(p.arch.activation, z, next.input, &L.slope);
    if (input_grad) {
      next.tin_x = L.slope.cwiseProduct(L.lin_x);
      next.tin_y = L.slope.cwiseProduct(L.lin_y);
    }
  }
  tb.seed_u = Eigen::VectorXd::Zero(n);
  if (input_grad) {
    tb.seed_u_x = Eigen::VectorXd::Zero(n);
    tb.seed_u_y = Eigen::VectorXd::Zero(n);
  }
  return tb;
}

void GradientTape::backward(std::span<double> grad) const {
  const auto& p = params_;
  if (grad.size() != p.theta.size()) {
    throw std::invalid_argument("GradientTape::backward: gradient length mismatch");
  }
  const std::size_t nl = p.arch.layer_count();
  const bool is_tanh = p.arch.activation == Activation::tanh;

  for (const auto& tb : batches_) {
    const bool tg = tb.input_grad_;
    Eigen::MatrixXd gz = tb.seed_u.transpose();
    Eigen::MatrixXd glx, gly;
    if (tg) {
      glx = tb.seed_u_x.transpose();
      gly = tb.seed_u_y.transpose();
    }
    for (std::size_t l = nl; l-- > 0;) {
      const auto& L = tb.layers_[l];
      const auto lv = layer_view(p, l);
      const auto fi = lv.w.cols();
      const auto fo = lv.w.rows();
      double* base = grad.data() + p.arch.offset(l);
      RowMat gw = gz * L.input.transpose();
      if (tg) {
        gw.noalias() += glx * L.tin_x.transpose();
        gw.noalias() += gly * L.tin_y.transpose();
      }
      const Eigen::VectorXd gb = gz.rowwise().sum();
      Eigen::Map<RowMat>(base, fo, fi) += gw;
      Eigen::Map<Eigen::VectorXd>(base + fo * fi, fo) += gb;
      if (l == 0) break;

      // Pull adjoints back through W, then through the activation of layer l-1.
      const auto& P = tb.layers_[l - 1];
      Eigen::MatrixXd ga = lv.w.transpose() * gz;
      gz = ga.cwiseProduct(P.slope);
      if (tg) {
        Eigen::MatrixXd gtx = lv.w.transpose() * glx;
        Eigen::MatrixXd gty = lv.w.transpose() * gly;
        if (is_tanh) {
          // d slope / dz = -2 tanh(z) slope
          Eigen::MatrixXd gs = gtx.cwiseProduct(P.lin_x) + gty.cwiseProduct(P.lin_y);
          gz.array() -= 2.0 * gs.array() * L.input.array() * P.slope.array();
        }
        glx = gtx.cwiseProduct(P.slope);
        gly = gty.cwiseProduct(P.slope);
      }
    }
  }
}

LossAndGradient param_gradient(const NetworkParams& p, const LossClosure& loss) {
  GradientTape tape(p);
  LossAndGradient out;
  out.loss = loss(tape);
  if (!std::isfinite(out.loss)) throw NonFiniteLoss("total", out.loss);
  out.gradient.assign(p.theta.size(), 0.0);
  tape.backward(out.gradient);
  return out;
}

AdamState AdamState::fresh(std::size_t n, double lr) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.lr = lr;
  return s;
}

void adam_step(AdamState& s, NetworkParams& p, std::span<const double> g) {
  const std::size_t n = p.theta.size();
  if (g.size() != n || s.m.size() != n || s.v.size() != n) {
    throw std::invalid_argument("adam_step: length mismatch between gradient, state and theta");
  }
  s.t += 1;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < n; ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    p.theta[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace ddvi
