#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mfgan/autodiff/tape.hpp"

namespace mfgan::ad {

/// Flat parameter array of one player (network weights plus any trainable
/// scalars appended after them).
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }
  bool all_finite() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

enum class Activation { kTanh, kSigmoid, kSine, kLinear, kRelu };

std::string_view activation_name(Activation a);
/// Inverse of activation_name; throws ConfigError on unknown tags.
Activation parse_activation(std::string_view name);
/// True for activations with the three continuous derivatives the jet
/// reverse pass needs.
bool is_smooth(Activation a);

/// Architecture of a fully connected network.
///
/// `widths.front()` is the raw input dimension and `widths.back()` the
/// output dimension. Coordinates flagged in `periodic` are embedded as
/// (sin 2πx, cos 2πx) before the first affine layer, which makes the
/// network exactly 1-periodic in them. The activation is applied on every
/// hidden layer; the output layer is affine.
struct NetworkSpec {
  std::vector<int> widths;
  Activation activation = Activation::kTanh;
  std::vector<bool> periodic;
  /// Trainable scalars stored after the weights (e.g. an ergodic constant).
  int extras = 0;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Immutable network architecture plus its parameter layout. Parameters
/// live outside in a ParamVector: per layer, the weight matrix in
/// row-major order followed by the bias.
class Mlp {
 public:
  struct Layer {
    std::size_t offset;  // index of W(0,0) in the parameter vector
    int in;
    int out;
  };

  explicit Mlp(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  int input_dim() const { return spec_.widths.front(); }
  int output_dim() const { return spec_.widths.back(); }
  /// Width of the first affine layer's input after the periodic embedding.
  int feature_dim() const { return feature_dim_; }
  bool is_periodic(int coordinate) const;
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t weight_count() const { return weight_count_; }
  std::size_t parameter_count() const { return weight_count_ + static_cast<std::size_t>(spec_.extras); }

  /// Glorot-uniform weights, zero biases, zero extras.
  ParamVector initialize(std::uint64_t seed) const;

 private:
  NetworkSpec spec_;
  int feature_dim_ = 0;
  std::vector<Layer> layers_;
  std::size_t weight_count_ = 0;
};

/// Value and input derivatives of a network output at one point.
/// `grad(o, k)` = ∂out_o/∂x_k and `diag2(o, k)` = ∂²out_o/∂x_k².
struct InputJet {
  Eigen::VectorXd value;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd diag2;

  /// Σ_k diag2(o, k) over coordinates k in [first, last).
  double laplacian(int output, int first, int last) const;
};

/// Jet of one network output recorded on a tape. Entries are indexed
/// [output][coordinate].
struct JetVar {
  std::vector<Var> value;
  std::vector<std::vector<Var>> grad;
  std::vector<std::vector<Var>> diag2;
};

/// Network value at x.
Eigen::VectorXd mlp_forward(const Mlp& net, const ParamVector& params, std::span<const double> x);
/// Column-wise network values for a batch of inputs (input_dim × B).
Eigen::MatrixXd mlp_forward_batch(const Mlp& net, const ParamVector& params,
                                  const Eigen::MatrixXd& inputs);

InputJet mlp_jet(const Mlp& net, const ParamVector& params, std::span<const double> x);
std::vector<InputJet> mlp_jet_batch(const Mlp& net, const ParamVector& params,
                                    const Eigen::MatrixXd& inputs);

/// Records the batch forward pass on `tape` as a single block reading the
/// leaves `params` (at least weight_count() of them). Returns values as
/// [sample][output].
std::vector<std::vector<Var>> mlp_forward(Tape& tape, const Mlp& net, VarRange params,
                                          const Eigen::MatrixXd& inputs);

/// Records the batch jet pass on `tape`; the parameter gradient of any loss
/// built from the returned jets flows back through exact jet adjoints.
std::vector<JetVar> mlp_jet(Tape& tape, const Mlp& net, VarRange params,
                            const Eigen::MatrixXd& inputs);

}  // namespace mfgan::ad
