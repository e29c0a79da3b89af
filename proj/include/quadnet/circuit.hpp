#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quadnet/network.hpp"

namespace quadnet {

/// Affine combination of the node outputs of one circuit layer. Layer 0 holds
/// the raw inputs; every later node is a ReLU quadratic neuron, so hidden
/// nodes are non-negative.
struct Signal {
  std::size_t layer = 0;
  std::vector<std::pair<std::size_t, double>> terms;  // (node, coefficient), sorted by node
  double constant = 0.0;
  bool nonnegative = false;

  Signal scaled(double s) const;
  Signal shifted(double c) const;
};

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);

/// Incrementally builds a layered quadratic ReLU network from gadgets.
///
/// Operations read signals of one layer and create neurons in the next.
/// Signals needed deeper in the network are carried forward with identity
/// neurons (sigma(v) = v for v >= 0, sigma(v) - sigma(-v) otherwise), which
/// are created once per node and cached.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::size_t input_dim);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t depth() const { return nodes_.size(); }
  std::size_t width(std::size_t layer) const;

  Signal input(std::size_t k) const;
  Signal constant(double value, std::size_t layer) const;

  /// sigma(s) as a new node in layer s.layer + 1.
  Signal relu(const Signal& s);
  /// sigma((w1.h + b1)(w2.h + b2) + w3.(h*h) + b3) for a neuron reading
  /// layer `layer`, with the two linear factors given as signals.
  Signal quadratic_relu(const Signal& u, const Signal& v, const std::vector<std::pair<std::size_t, double>>& w3,
                        double b3);
  /// Two-neuron product gadget: sigma(uv) - sigma(-uv) = uv.
  Signal product(const Signal& u, const Signal& v);
  /// The same value carried to `target_layer` >= s.layer.
  Signal lift(const Signal& s, std::size_t target_layer);

  std::size_t product_count() const { return products_; }

  /// Dense network: one quadratic ReLU layer per circuit layer, then a
  /// conventional identity read-out of `outputs` lifted to the last layer.
  Network build(const std::vector<Signal>& outputs);

 private:
  struct Node {
    std::vector<std::pair<std::size_t, double>> w1, w2, w3;
    double b1 = 0.0, b2 = 1.0, b3 = 0.0;
  };

  std::size_t add_node(std::size_t layer, Node node);
  Signal lift_one(const Signal& s);

  std::size_t input_dim_;
  std::vector<std::vector<Node>> nodes_;  // nodes_[L - 1] holds layer L
  std::map<std::pair<std::size_t, std::string>, Signal> lift_cache_;
  std::size_t products_ = 0;
};

}  // namespace quadnet
