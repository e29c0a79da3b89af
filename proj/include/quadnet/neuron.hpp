#pragma once

#include <span>

#include "quadnet/linalg.hpp"

namespace quadnet {

/// One quadratic neuron: (w1.x + b1)(w2.x + b2) + w3.(x*x) + b3.
struct QuadraticParams {
  Vector w1;
  double b1 = 0.0;
  Vector w2;
  double b2 = 0.0;
  Vector w3;
  double b3 = 0.0;

  std::size_t dim() const { return w1.size(); }
  /// Throws unless w1, w2, w3 share one size.
  void validate() const;

  /// Parameters that make the neuron compute w.x + b exactly.
  static QuadraticParams degenerate(Vector w, double b);
};

/// One conventional neuron: w.x + b.
struct ConventionalParams {
  Vector w;
  double b = 0.0;
};

struct QuadraticGrads {
  Vector w1;
  double b1 = 0.0;
  Vector w2;
  double b2 = 0.0;
  Vector w3;
  double b3 = 0.0;
  Vector x;
};

double quad_preactivation(const QuadraticParams& p, std::span<const double> x);
double conv_preactivation(const ConventionalParams& p, std::span<const double> x);

/// Gradients of upstream * z(p, x) with respect to every parameter group and x.
QuadraticGrads quad_backward(const QuadraticParams& p, std::span<const double> x, double upstream);

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace quadnet
