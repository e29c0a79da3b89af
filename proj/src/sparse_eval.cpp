#include "quadnet/sparse_eval.hpp"

#include "quadnet/errors.hpp"

namespace quadnet {

namespace {

template <typename Term>
std::vector<Term> nonzeros(std::span<const double> row, std::size_t& count) {
  std::vector<Term> out;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] != 0.0) out.push_back({static_cast<std::uint32_t>(k), row[k]});
  }
  count += out.size();
  return out;
}

}  // namespace

SparseNetwork::SparseNetwork(const Network& net) : input_dim_(net.input_dim()), output_dim_(net.output_dim()) {
  for (const Layer& l : net.layers()) {
    SparseLayer sl;
    sl.quadratic = l.kind() == NeuronKind::quadratic;
    sl.relu = l.activation() == Activation::relu;
    sl.neurons.resize(l.out_dim());
    for (std::size_t i = 0; i < l.out_dim(); ++i) {
      Neuron& n = sl.neurons[i];
      n.w1 = nonzeros<Term>(l.w1().row(i), nonzeros_);
      n.b1 = l.b1()[i];
      nonzeros_ += (n.b1 != 0.0);
      if (sl.quadratic) {
        n.w2 = nonzeros<Term>(l.w2().row(i), nonzeros_);
        n.w3 = nonzeros<Term>(l.w3().row(i), nonzeros_);
        n.b2 = l.b2()[i];
        n.b3 = l.b3()[i];
        nonzeros_ += (n.b2 != 0.0) + (n.b3 != 0.0);
      }
    }
    layers_.push_back(std::move(sl));
  }
}

Vector SparseNetwork::forward(std::span<const double> x) const {
  if (x.size() != input_dim_) throw ValidationError("sparse forward: input size mismatch");
  std::vector<double> h(x.begin(), x.end());
  std::vector<double> next;
  for (const SparseLayer& l : layers_) {
    next.assign(l.neurons.size(), 0.0);
    for (std::size_t i = 0; i < l.neurons.size(); ++i) {
      const Neuron& n = l.neurons[i];
      double a1 = 0.0;
      for (const Term& t : n.w1) a1 += t.weight * h[t.index];
      double z = a1 + n.b1;
      if (l.quadratic) {
        double a2 = 0.0;
        for (const Term& t : n.w2) a2 += t.weight * h[t.index];
        double a3 = 0.0;
        for (const Term& t : n.w3) a3 += t.weight * (h[t.index] * h[t.index]);
        z = z * (a2 + n.b2) + a3 + n.b3;
      }
      next[i] = l.relu ? relu(z) : z;
    }
    h.swap(next);
  }
  return Vector(std::move(h));
}

}  // namespace quadnet
