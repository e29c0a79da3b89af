#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quadnet/network.hpp"

namespace quadnet {

/// Read-only evaluator that skips zero weights. It performs the same
/// floating-point operations as Network::forward in the same order, minus
/// additions of exact zeros, so results agree bit for bit on finite inputs.
/// Used for the very wide, very sparse networks emitted by the builders.
class SparseNetwork {
 public:
  explicit SparseNetwork(const Network& net);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t nonzero_count() const { return nonzeros_; }

  Vector forward(std::span<const double> x) const;

 private:
  struct Term {
    std::uint32_t index;
    double weight;
  };
  struct Neuron {
    std::vector<Term> w1, w2, w3;
    double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  };
  struct SparseLayer {
    bool quadratic = false;
    bool relu = false;
    std::vector<Neuron> neurons;
  };

  std::vector<SparseLayer> layers_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::size_t nonzeros_ = 0;
};

}  // namespace quadnet
