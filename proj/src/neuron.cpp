#include "quadnet/neuron.hpp"

#include <string>

#include "quadnet/errors.hpp"

namespace quadnet {

void QuadraticParams::validate() const {
  if (w2.size() != w1.size() || w3.size() != w1.size()) {
    throw ValidationError("quadratic neuron: weight vectors differ in size (" + std::to_string(w1.size()) +
                          ", " + std::to_string(w2.size()) + ", " + std::to_string(w3.size()) + ")");
  }
}

QuadraticParams QuadraticParams::degenerate(Vector w, double b) {
  const std::size_t d = w.size();
  return QuadraticParams{std::move(w), b, Vector(d), 1.0, Vector(d), 0.0};
}

double quad_preactivation(const QuadraticParams& p, std::span<const double> x) {
  p.validate();
  if (x.size() != p.dim()) {
    throw ValidationError("quad_preactivation: input has " + std::to_string(x.size()) + " entries, neuron expects " +
                          std::to_string(p.dim()));
  }
  const double l1 = dot(p.w1.span(), x) + p.b1;
  const double l2 = dot(p.w2.span(), x) + p.b2;
  return l1 * l2 + dot_squared(p.w3.span(), x) + p.b3;
}

double conv_preactivation(const ConventionalParams& p, std::span<const double> x) {
  if (x.size() != p.w.size()) {
    throw ValidationError("conv_preactivation: input has " + std::to_string(x.size()) + " entries, neuron expects " +
                          std::to_string(p.w.size()));
  }
  return dot(p.w.span(), x) + p.b;
}

QuadraticGrads quad_backward(const QuadraticParams& p, std::span<const double> x, double upstream) {
  p.validate();
  if (x.size() != p.dim()) throw ValidationError("quad_backward: input size mismatch");
  const std::size_t d = x.size();
  const double l1 = dot(p.w1.span(), x) + p.b1;
  const double l2 = dot(p.w2.span(), x) + p.b2;
  QuadraticGrads g{Vector(d), upstream * l2, Vector(d), upstream * l1, Vector(d), upstream, Vector(d)};
  for (std::size_t i = 0; i < d; ++i) {
    g.w1[i] = upstream * l2 * x[i];
    g.w2[i] = upstream * l1 * x[i];
    g.w3[i] = upstream * x[i] * x[i];
    g.x[i] = upstream * (l2 * p.w1[i] + l1 * p.w2[i] + 2.0 * p.w3[i] * x[i]);
  }
  return g;
}

}  // namespace quadnet
