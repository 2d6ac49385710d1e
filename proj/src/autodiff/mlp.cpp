#include "mfgan/autodiff/mlp.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "mfgan/common/error.hpp"

namespace mfgan::ad {

namespace {

using Eigen::MatrixXd;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMutMap = Eigen::Map<Eigen::VectorXd>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Elementwise φ and its first three derivatives at z.
struct ActivationDerivatives {
  MatrixXd f, d1, d2, d3;
};

ActivationDerivatives evaluate_activation(Activation act, const MatrixXd& z, int order) {
  ActivationDerivatives r;
  switch (act) {
    case Activation::kTanh: {
      r.f = z.array().tanh().matrix();
      if (order >= 1) r.d1 = (1.0 - r.f.array().square()).matrix();
      if (order >= 2) r.d2 = (-2.0 * r.f.array() * r.d1.array()).matrix();
      if (order >= 3) {
        r.d3 = (-2.0 * r.d1.array().square() + 4.0 * r.f.array().square() * r.d1.array()).matrix();
      }
      break;
    }
    case Activation::kSigmoid: {
      r.f = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      if (order >= 1) r.d1 = (r.f.array() * (1.0 - r.f.array())).matrix();
      if (order >= 2) r.d2 = (r.d1.array() * (1.0 - 2.0 * r.f.array())).matrix();
      if (order >= 3) {
        r.d3 = (r.d2.array() * (1.0 - 2.0 * r.f.array()) - 2.0 * r.d1.array().square()).matrix();
      }
      break;
    }
    case Activation::kSine: {
      r.f = z.array().sin().matrix();
      if (order >= 1) r.d1 = z.array().cos().matrix();
      if (order >= 2) r.d2 = -r.f;
      if (order >= 3) r.d3 = -r.d1;
      break;
    }
    case Activation::kLinear: {
      r.f = z;
      if (order >= 1) r.d1 = MatrixXd::Ones(z.rows(), z.cols());
      if (order >= 2) r.d2 = MatrixXd::Zero(z.rows(), z.cols());
      if (order >= 3) r.d3 = MatrixXd::Zero(z.rows(), z.cols());
      break;
    }
    case Activation::kRelu: {
      if (order > 1) throw UnsupportedActivation("relu has no second derivative; jets need tanh, sigmoid, sine or linear");
      r.f = z.cwiseMax(0.0);
      if (order >= 1) r.d1 = (z.array() > 0.0).cast<double>().matrix();
      break;
    }
  }
  return r;
}

// One batched jet pass. Derivative matrices hold coordinate k in the column
// block [k*B, (k+1)*B).
class JetPass {
 public:
  JetPass(const Mlp& net, std::span<const double> weights, const MatrixXd& inputs, bool derivs)
      : net_(net), weights_(weights.begin(), weights.end()), derivs_(derivs) {
    if (inputs.rows() != net.input_dim()) {
      throw ShapeError("layer 0: input has " + std::to_string(inputs.rows()) +
                       " coordinates, network expects " + std::to_string(net.input_dim()));
    }
    if (weights.size() < net.weight_count()) {
      throw ShapeError("parameter vector has " + std::to_string(weights.size()) +
                       " entries, network needs " + std::to_string(net.weight_count()));
    }
    if (derivs && !is_smooth(net.spec().activation)) {
      throw UnsupportedActivation(std::string("activation '") +
                                  std::string(activation_name(net.spec().activation)) +
                                  "' is not smooth enough for jet propagation");
    }
    batch_ = inputs.cols();
    coords_ = net.input_dim();
    run(inputs);
  }

  Eigen::Index batch() const { return batch_; }
  int coords() const { return coords_; }
  const MatrixXd& value() const { return out_val_; }
  const MatrixXd& d1() const { return out_d_; }
  const MatrixXd& d2() const { return out_d2_; }

  void backward(const MatrixXd& val_bar, const MatrixXd& d_bar, const MatrixXd& d2_bar,
                std::span<double> weight_adjoint) const;

 private:
  struct Cache {
    MatrixXd a_val, a_d, a_d2;  // layer input
    MatrixXd z_val, z_d, z_d2;  // pre-activation output
  };

  void embed(const MatrixXd& inputs, MatrixXd& f, MatrixXd& fd, MatrixXd& fd2) const;
  void run(const MatrixXd& inputs);

  Mlp net_;
  std::vector<double> weights_;
  bool derivs_;
  Eigen::Index batch_ = 0;
  int coords_ = 0;
  std::vector<Cache> cache_;
  MatrixXd out_val_, out_d_, out_d2_;
};

void JetPass::embed(const MatrixXd& inputs, MatrixXd& f, MatrixXd& fd, MatrixXd& fd2) const {
  const Eigen::Index b = batch_;
  f.resize(net_.feature_dim(), b);
  if (derivs_) {
    fd = MatrixXd::Zero(net_.feature_dim(), b * coords_);
    fd2 = MatrixXd::Zero(net_.feature_dim(), b * coords_);
  }
  int row = 0;
  for (int k = 0; k < coords_; ++k) {
    if (net_.is_periodic(k)) {
      for (Eigen::Index j = 0; j < b; ++j) {
        const double x = inputs(k, j);
        const double angle = kTwoPi * (x - std::floor(x));
        const double s = std::sin(angle);
        const double c = std::cos(angle);
        f(row, j) = s;
        f(row + 1, j) = c;
        if (derivs_) {
          fd(row, k * b + j) = kTwoPi * c;
          fd(row + 1, k * b + j) = -kTwoPi * s;
          fd2(row, k * b + j) = -kTwoPi * kTwoPi * s;
          fd2(row + 1, k * b + j) = -kTwoPi * kTwoPi * c;
        }
      }
      row += 2;
    } else {
      f.row(row) = inputs.row(k);
      if (derivs_) fd.block(row, k * b, 1, b).setOnes();
      row += 1;
    }
  }
}

void JetPass::run(const MatrixXd& inputs) {
  MatrixXd a_val, a_d, a_d2;
  embed(inputs, a_val, a_d, a_d2);
  const auto& layers = net_.layers();
  cache_.resize(layers.size());
  const Activation act = net_.spec().activation;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const RowMajorMap w(weights_.data() + layer.offset, layer.out, layer.in);
    const VecMap bias(weights_.data() + layer.offset + static_cast<std::size_t>(layer.out * layer.in),
                      layer.out);
    Cache& c = cache_[l];
    c.z_val.noalias() = w * a_val;
    c.z_val.colwise() += bias;
    if (derivs_) {
      c.z_d.noalias() = w * a_d;
      c.z_d2.noalias() = w * a_d2;
    }
    c.a_val = std::move(a_val);
    c.a_d = std::move(a_d);
    c.a_d2 = std::move(a_d2);
    if (l + 1 == layers.size()) break;

    const ActivationDerivatives phi = evaluate_activation(act, c.z_val, derivs_ ? 2 : 0);
    a_val = phi.f;
    if (derivs_) {
      a_d.resize(c.z_d.rows(), c.z_d.cols());
      a_d2.resize(c.z_d.rows(), c.z_d.cols());
      for (int k = 0; k < coords_; ++k) {
        const auto zd = c.z_d.middleCols(k * batch_, batch_).array();
        const auto zd2 = c.z_d2.middleCols(k * batch_, batch_).array();
        a_d.middleCols(k * batch_, batch_) = (phi.d1.array() * zd).matrix();
        a_d2.middleCols(k * batch_, batch_) =
            (phi.d2.array() * zd.square() + phi.d1.array() * zd2).matrix();
      }
    }
  }
  const Cache& last = cache_.back();
  out_val_ = last.z_val;
  if (derivs_) {
    out_d_ = last.z_d;
    out_d2_ = last.z_d2;
  }
}

void JetPass::backward(const MatrixXd& val_bar, const MatrixXd& d_bar, const MatrixXd& d2_bar,
                       std::span<double> weight_adjoint) const {
  const auto& layers = net_.layers();
  const Activation act = net_.spec().activation;
  MatrixXd z_bar = val_bar;
  MatrixXd zd_bar = d_bar;
  MatrixXd zd2_bar = d2_bar;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Cache& c = cache_[l];
    RowMajorMutMap w_bar(weight_adjoint.data() + layer.offset, layer.out, layer.in);
    VecMutMap b_bar(weight_adjoint.data() + layer.offset + static_cast<std::size_t>(layer.out * layer.in),
                    layer.out);
    w_bar.noalias() += z_bar * c.a_val.transpose();
    if (derivs_) {
      w_bar.noalias() += zd_bar * c.a_d.transpose();
      w_bar.noalias() += zd2_bar * c.a_d2.transpose();
    }
    b_bar += z_bar.rowwise().sum();
    if (l == 0) break;

    const RowMajorMap w(weights_.data() + layer.offset, layer.out, layer.in);
    const MatrixXd a_bar = w.transpose() * z_bar;
    const Cache& prev = cache_[l - 1];
    const ActivationDerivatives phi = evaluate_activation(act, prev.z_val, derivs_ ? 3 : 1);
    z_bar = (phi.d1.array() * a_bar.array()).matrix();
    if (derivs_) {
      const MatrixXd ad_bar = w.transpose() * zd_bar;
      const MatrixXd ad2_bar = w.transpose() * zd2_bar;
      zd_bar.resize(ad_bar.rows(), ad_bar.cols());
      zd2_bar.resize(ad_bar.rows(), ad_bar.cols());
      for (int k = 0; k < coords_; ++k) {
        const auto zd = prev.z_d.middleCols(k * batch_, batch_).array();
        const auto zd2 = prev.z_d2.middleCols(k * batch_, batch_).array();
        const auto gd = ad_bar.middleCols(k * batch_, batch_).array();
        const auto gd2 = ad2_bar.middleCols(k * batch_, batch_).array();
        zd2_bar.middleCols(k * batch_, batch_) = (phi.d1.array() * gd2).matrix();
        zd_bar.middleCols(k * batch_, batch_) =
            (phi.d1.array() * gd + 2.0 * phi.d2.array() * zd * gd2).matrix();
        z_bar.array() += phi.d2.array() * zd * gd +
                         (phi.d3.array() * zd.square() + phi.d2.array() * zd2) * gd2;
      }
    }
  }
}

class MlpBlock final : public TapeBlock {
 public:
  MlpBlock(std::unique_ptr<JetPass> pass, int param_first, int out_dim, bool derivs)
      : pass_(std::move(pass)), param_first_(param_first), out_dim_(out_dim), derivs_(derivs) {}

  std::size_t stride() const {
    return static_cast<std::size_t>(out_dim_) *
           (derivs_ ? 1 + 2 * static_cast<std::size_t>(pass_->coords()) : 1);
  }

  // Outputs per sample: values, then grad[o][k], then diag2[o][k].
  std::vector<double> outputs() const {
    const auto b = pass_->batch();
    const int n = pass_->coords();
    std::vector<double> out;
    out.reserve(stride() * static_cast<std::size_t>(b));
    for (Eigen::Index j = 0; j < b; ++j) {
      for (int o = 0; o < out_dim_; ++o) out.push_back(pass_->value()(o, j));
      if (!derivs_) continue;
      for (int o = 0; o < out_dim_; ++o)
        for (int k = 0; k < n; ++k) out.push_back(pass_->d1()(o, k * b + j));
      for (int o = 0; o < out_dim_; ++o)
        for (int k = 0; k < n; ++k) out.push_back(pass_->d2()(o, k * b + j));
    }
    return out;
  }

  void backward(std::span<const double> output_adjoints, std::span<double> adjoints) const override {
    const auto b = pass_->batch();
    const int n = pass_->coords();
    MatrixXd val_bar(out_dim_, b);
    MatrixXd d_bar, d2_bar;
    if (derivs_) {
      d_bar.resize(out_dim_, b * n);
      d2_bar.resize(out_dim_, b * n);
    }
    std::size_t pos = 0;
    for (Eigen::Index j = 0; j < b; ++j) {
      for (int o = 0; o < out_dim_; ++o) val_bar(o, j) = output_adjoints[pos++];
      if (!derivs_) continue;
      for (int o = 0; o < out_dim_; ++o)
        for (int k = 0; k < n; ++k) d_bar(o, k * b + j) = output_adjoints[pos++];
      for (int o = 0; o < out_dim_; ++o)
        for (int k = 0; k < n; ++k) d2_bar(o, k * b + j) = output_adjoints[pos++];
    }
    pass_->backward(val_bar, d_bar, d2_bar,
                    adjoints.subspan(static_cast<std::size_t>(param_first_)));
  }

 private:
  std::unique_ptr<JetPass> pass_;
  int param_first_;
  int out_dim_;
  bool derivs_;
};

Eigen::MatrixXd column(std::span<const double> x) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = x[i];
  return m;
}

}  // namespace

bool ParamVector::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSine: return "sine";
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::kTanh, Activation::kSigmoid, Activation::kSine,
                       Activation::kLinear, Activation::kRelu}) {
    if (activation_name(a) == name) return a;
  }
  throw ConfigError("activation", "unknown activation '" + std::string(name) + "'");
}

bool is_smooth(Activation a) { return a != Activation::kRelu; }

Mlp::Mlp(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.widths.size() < 2) throw ShapeError("network needs at least input and output widths");
  for (std::size_t i = 0; i < spec_.widths.size(); ++i) {
    if (spec_.widths[i] <= 0) {
      throw ShapeError("layer width " + std::to_string(i) + " must be positive");
    }
  }
  if (spec_.periodic.empty()) spec_.periodic.assign(static_cast<std::size_t>(input_dim()), false);
  if (spec_.periodic.size() != static_cast<std::size_t>(input_dim())) {
    throw ShapeError("periodic mask has " + std::to_string(spec_.periodic.size()) +
                     " entries for input dimension " + std::to_string(input_dim()));
  }
  if (spec_.extras < 0) throw ShapeError("extras must be non-negative");
  for (bool p : spec_.periodic) feature_dim_ += p ? 2 : 1;

  std::size_t offset = 0;
  int in = feature_dim_;
  for (std::size_t l = 1; l < spec_.widths.size(); ++l) {
    const int out = spec_.widths[l];
    layers_.push_back(Layer{offset, in, out});
    offset += static_cast<std::size_t>(in) * static_cast<std::size_t>(out) + static_cast<std::size_t>(out);
    in = out;
  }
  weight_count_ = offset;
}

bool Mlp::is_periodic(int coordinate) const {
  return spec_.periodic[static_cast<std::size_t>(coordinate)];
}

ParamVector Mlp::initialize(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  ParamVector params(parameter_count(), 0.0);
  for (const auto& layer : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t n = static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out);
    for (std::size_t i = 0; i < n; ++i) params[layer.offset + i] = dist(rng);
  }
  return params;
}

double InputJet::laplacian(int output, int first, int last) const {
  double sum = 0.0;
  for (int k = first; k < last; ++k) sum += diag2(output, k);
  return sum;
}

Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const ParamVector& params,
                                  const Eigen::MatrixXd& inputs) {
  return JetPass(net, params.span(), inputs, false).value();
}

Eigen::VectorXd mlp_forward(const Mlp& net, const ParamVector& params, std::span<const double> x) {
  return mlp_forward_batch(net, params, column(x)).col(0);
}

std::vector<InputJet> mlp_jet_batch(const Mlp& net, const ParamVector& params,
                                    const Eigen::MatrixXd& inputs) {
  const JetPass pass(net, params.span(), inputs, true);
  const auto b = pass.batch();
  const int n = pass.coords();
  std::vector<InputJet> jets(static_cast<std::size_t>(b));
  for (Eigen::Index j = 0; j < b; ++j) {
    InputJet& jet = jets[static_cast<std::size_t>(j)];
    jet.value = pass.value().col(j);
    jet.grad.resize(net.output_dim(), n);
    jet.diag2.resize(net.output_dim(), n);
    for (int k = 0; k < n; ++k) {
      jet.grad.col(k) = pass.d1().col(k * b + j);
      jet.diag2.col(k) = pass.d2().col(k * b + j);
    }
  }
  return jets;
}

InputJet mlp_jet(const Mlp& net, const ParamVector& params, std::span<const double> x) {
  return mlp_jet_batch(net, params, column(x)).front();
}

std::vector<std::vector<Var>> mlp_forward(Tape& tape, const Mlp& net, VarRange params,
                                          const Eigen::MatrixXd& inputs) {
  if (params.tape() != &tape) throw Error("parameters recorded on a different tape");
  auto pass = std::make_unique<JetPass>(net, params.values(), inputs, false);
  const auto b = pass->batch();
  auto block = std::make_unique<MlpBlock>(std::move(pass), params.first(), net.output_dim(), false);
  const std::vector<double> outputs = block->outputs();
  const int first = tape.add_block(std::move(block), outputs);
  const VarRange nodes(&tape, first, static_cast<int>(outputs.size()));
  std::vector<std::vector<Var>> values(static_cast<std::size_t>(b));
  std::size_t pos = 0;
  for (auto& v : values)
    for (int o = 0; o < net.output_dim(); ++o) v.push_back(nodes[pos++]);
  return values;
}

std::vector<JetVar> mlp_jet(Tape& tape, const Mlp& net, VarRange params,
                            const Eigen::MatrixXd& inputs) {
  if (params.tape() != &tape) throw Error("parameters recorded on a different tape");
  auto pass = std::make_unique<JetPass>(net, params.values(), inputs, true);
  const auto b = pass->batch();
  const int n = pass->coords();
  auto block = std::make_unique<MlpBlock>(std::move(pass), params.first(), net.output_dim(), true);
  const std::vector<double> outputs = block->outputs();
  const int first = tape.add_block(std::move(block), outputs);
  const VarRange nodes(&tape, first, static_cast<int>(outputs.size()));
  const int out_dim = net.output_dim();
  std::vector<JetVar> jets(static_cast<std::size_t>(b));
  std::size_t pos = 0;
  for (auto& jet : jets) {
    for (int o = 0; o < out_dim; ++o) jet.value.push_back(nodes[pos++]);
    jet.grad.assign(static_cast<std::size_t>(out_dim), {});
    jet.diag2.assign(static_cast<std::size_t>(out_dim), {});
    for (int o = 0; o < out_dim; ++o)
      for (int k = 0; k < n; ++k) jet.grad[static_cast<std::size_t>(o)].push_back(nodes[pos++]);
    for (int o = 0; o < out_dim; ++o)
      for (int k = 0; k < n; ++k) jet.diag2[static_cast<std::size_t>(o)].push_back(nodes[pos++]);
  }
  return jets;
}

}  // namespace mfgan::ad
