#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quadnet/linalg.hpp"
#include "quadnet/neuron.hpp"

namespace quadnet {

enum class NeuronKind { quadratic, conventional };
enum class Activation { relu, identity };

std::string_view to_string(NeuronKind kind);
std::string_view to_string(Activation act);
NeuronKind parse_neuron_kind(std::string_view text);
Activation parse_activation(std::string_view text);

/// Per-sample intermediate values of one layer, kept for backward.
struct LayerCache {
  Vector input;
  Vector lin1;  // w1.x + b1
  Vector lin2;  // w2.x + b2 (quadratic only)
  Vector pre;
  Vector out;
};

/// A named, contiguous run of parameters. `quadratic_term` marks the w2, b2,
/// w3, b3 groups that the two-rate optimizer updates with its second rate.
struct ParamBlock {
  std::span<double> values;
  bool quadratic_term = false;
};

/// Fully connected layer of one neuron kind. Neuron i's weights are row i of
/// the weight matrices. Conventional layers use only w1/b1.
class Layer {
 public:
  Layer() = default;
  Layer(NeuronKind kind, std::size_t in_dim, std::size_t out_dim, Activation act);

  NeuronKind kind() const { return kind_; }
  Activation activation() const { return activation_; }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  Matrix& w1() { return w1_; }
  Vector& b1() { return b1_; }
  Matrix& w2() { return w2_; }
  Vector& b2() { return b2_; }
  Matrix& w3() { return w3_; }
  Vector& b3() { return b3_; }
  const Matrix& w1() const { return w1_; }
  const Vector& b1() const { return b1_; }
  const Matrix& w2() const { return w2_; }
  const Vector& b2() const { return b2_; }
  const Matrix& w3() const { return w3_; }
  const Vector& b3() const { return b3_; }

  QuadraticParams quadratic_neuron(std::size_t i) const;
  ConventionalParams conventional_neuron(std::size_t i) const;
  void set_neuron(std::size_t i, const QuadraticParams& p);
  void set_neuron(std::size_t i, const ConventionalParams& p);

  std::size_t param_count() const;
  std::size_t flop_count() const;

  Vector forward(std::span<const double> x) const;
  void forward(std::span<const double> x, LayerCache& cache) const;
  /// Accumulates parameter gradients into `grad` (same shape) and returns dL/dx.
  Vector backward(const LayerCache& cache, std::span<const double> dout, Layer& grad) const;

  std::vector<ParamBlock> blocks();

  /// Same shape, all parameters zero.
  Layer zeros_like() const;

  bool operator==(const Layer& other) const = default;

 private:
  NeuronKind kind_ = NeuronKind::conventional;
  Activation activation_ = Activation::identity;
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  bool frozen_ = false;
  Matrix w1_;
  Vector b1_;
  Matrix w2_;
  Vector b2_;
  Matrix w3_;
  Vector b3_;
};

struct ForwardCache {
  std::vector<LayerCache> layers;
};

/// Ordered stack of layers whose shapes chain.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }
  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const;
  std::size_t output_dim() const;

  /// Throws if layer i's output size differs from layer i+1's input size.
  void validate() const;

  Vector forward(std::span<const double> x) const;
  Vector forward(std::span<const double> x, ForwardCache& cache) const;
  /// Accumulates into `grad` (a zeros_like() network) and returns dL/dx.
  Vector backward(const ForwardCache& cache, std::span<const double> dout, Network& grad) const;

  Network zeros_like() const;
  std::vector<ParamBlock> blocks();

  bool operator==(const Network& other) const = default;

 private:
  std::vector<Layer> layers_;
};

Vector network_forward(const Network& net, std::span<const double> x);

/// Trainable scalars: conventional (in+1)*out, quadratic (3*in+3)*out per layer.
std::size_t param_count(const Network& net);
/// Weight-input multiplications per forward pass: in*out conventional, 3*in*out quadratic.
std::size_t flop_count(const Network& net);

/// Architecture string such as "Q(20-30-10)" or "C(20-150-100-10)".
struct ArchSpec {
  NeuronKind kind = NeuronKind::conventional;
  std::vector<std::size_t> widths;

  std::string to_string() const;
};

ArchSpec parse_arch(std::string_view text);
/// Zero-initialized network: ReLU on hidden layers, identity on the output.
Network make_network(const ArchSpec& arch);

}  // namespace quadnet
