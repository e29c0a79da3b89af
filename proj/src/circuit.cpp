#include "quadnet/circuit.hpp"

#include <algorithm>

#include "quadnet/errors.hpp"
#include "quadnet/format.hpp"

namespace quadnet {

namespace {

using Terms = std::vector<std::pair<std::size_t, double>>;

Terms merge(const Terms& a, double ca, const Terms& b, double cb) {
  Terms out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.emplace_back(a[i].first, ca * a[i].second);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.emplace_back(b[j].first, cb * b[j].second);
      ++j;
    } else {
      out.emplace_back(a[i].first, ca * a[i].second + cb * b[j].second);
      ++i;
      ++j;
    }
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  return out;
}

std::string key_of(const Signal& s) {
  std::string key = fmt17(s.constant);
  for (const auto& [node, c] : s.terms) key += ";" + std::to_string(node) + ":" + fmt17(c);
  return key;
}

}  // namespace

Signal Signal::scaled(double s) const {
  Signal out{layer, {}, constant * s, nonnegative && s >= 0.0};
  out.terms = merge(terms, s, {}, 0.0);
  return out;
}

Signal Signal::shifted(double c) const {
  Signal out = *this;
  out.constant += c;
  out.nonnegative = nonnegative && c >= 0.0;
  return out;
}

Signal operator+(const Signal& a, const Signal& b) {
  if (a.layer != b.layer) throw ValidationError("signal sum across layers");
  return Signal{a.layer, merge(a.terms, 1.0, b.terms, 1.0), a.constant + b.constant, a.nonnegative && b.nonnegative};
}

Signal operator-(const Signal& a, const Signal& b) {
  if (a.layer != b.layer) throw ValidationError("signal difference across layers");
  return Signal{a.layer, merge(a.terms, 1.0, b.terms, -1.0), a.constant - b.constant, false};
}

CircuitBuilder::CircuitBuilder(std::size_t input_dim) : input_dim_(input_dim) {
  if (input_dim == 0) throw ValidationError("circuit needs at least one input");
}

std::size_t CircuitBuilder::width(std::size_t layer) const {
  return layer == 0 ? input_dim_ : nodes_.at(layer - 1).size();
}

Signal CircuitBuilder::input(std::size_t k) const {
  if (k >= input_dim_) throw ValidationError("circuit input index out of range");
  return Signal{0, {{k, 1.0}}, 0.0, false};
}

Signal CircuitBuilder::constant(double value, std::size_t layer) const {
  return Signal{layer, {}, value, value >= 0.0};
}

std::size_t CircuitBuilder::add_node(std::size_t layer, Node node) {
  if (layer == 0) throw ValidationError("cannot add nodes to the input layer");
  if (nodes_.size() < layer) nodes_.resize(layer);
  nodes_[layer - 1].push_back(std::move(node));
  return nodes_[layer - 1].size() - 1;
}

Signal CircuitBuilder::relu(const Signal& s) {
  Node n;
  n.w1 = s.terms;
  n.b1 = s.constant;
  const std::size_t id = add_node(s.layer + 1, std::move(n));
  return Signal{s.layer + 1, {{id, 1.0}}, 0.0, true};
}

Signal CircuitBuilder::quadratic_relu(const Signal& u, const Signal& v, const Terms& w3, double b3) {
  if (u.layer != v.layer) throw ValidationError("quadratic neuron factors on different layers");
  Node n;
  n.w1 = u.terms;
  n.b1 = u.constant;
  n.w2 = v.terms;
  n.b2 = v.constant;
  n.w3 = w3;
  n.b3 = b3;
  const std::size_t id = add_node(u.layer + 1, std::move(n));
  return Signal{u.layer + 1, {{id, 1.0}}, 0.0, true};
}

Signal CircuitBuilder::product(const Signal& u, const Signal& v) {
  if (u.layer != v.layer) throw ValidationError("product gadget factors on different layers");
  const Signal pos = quadratic_relu(u, v, {}, 0.0);
  const Signal neg = quadratic_relu(u.scaled(-1.0), v, {}, 0.0);
  ++products_;
  Signal out = pos - neg;
  out.nonnegative = u.nonnegative && v.nonnegative;
  return out;
}

Signal CircuitBuilder::lift_one(const Signal& s) {
  if (s.terms.empty()) return Signal{s.layer + 1, {}, s.constant, s.nonnegative};
  const auto key = std::make_pair(s.layer, key_of(s));
  if (auto it = lift_cache_.find(key); it != lift_cache_.end()) return it->second;

  Signal out;
  if (s.nonnegative) {
    out = relu(s);
  } else if (s.layer > 0) {
    // hidden nodes are ReLU outputs: carry each one forward and recombine
    Signal acc = constant(s.constant, s.layer + 1);
    for (const auto& [node, c] : s.terms) {
      acc = acc + lift_one(Signal{s.layer, {{node, 1.0}}, 0.0, true}).scaled(c);
    }
    out = acc;
  } else {
    // raw inputs may be negative: carry each coordinate as sigma(x) - sigma(-x)
    Signal acc = constant(s.constant, 1);
    for (const auto& [node, c] : s.terms) {
      const Signal x{0, {{node, 1.0}}, 0.0, false};
      const auto xkey = std::make_pair(std::size_t{0}, key_of(x));
      Signal carried;
      if (auto it = lift_cache_.find(xkey); it != lift_cache_.end()) {
        carried = it->second;
      } else {
        carried = relu(x) - relu(x.scaled(-1.0));
        lift_cache_.emplace(xkey, carried);
      }
      acc = acc + carried.scaled(c);
    }
    out = acc;
  }
  out.nonnegative = s.nonnegative;
  lift_cache_.emplace(key, out);
  return out;
}

Signal CircuitBuilder::lift(const Signal& s, std::size_t target_layer) {
  if (target_layer < s.layer) throw ValidationError("cannot lift a signal to an earlier layer");
  Signal cur = s;
  while (cur.layer < target_layer) cur = lift_one(cur);
  return cur;
}

Network CircuitBuilder::build(const std::vector<Signal>& outputs) {
  if (outputs.empty()) throw ValidationError("circuit has no outputs");
  std::size_t last = std::max<std::size_t>(1, nodes_.size());
  for (const Signal& s : outputs) last = std::max(last, s.layer);
  std::vector<Signal> lifted;
  for (const Signal& s : outputs) lifted.push_back(lift(s, last));
  if (nodes_.size() < last) nodes_.resize(last);

  std::vector<Layer> layers;
  for (std::size_t L = 1; L <= last; ++L) {
    const auto& nodes = nodes_[L - 1];
    if (nodes.empty()) throw ValidationError("circuit layer " + std::to_string(L) + " is empty");
    Layer layer(NeuronKind::quadratic, width(L - 1), nodes.size(), Activation::relu);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& n = nodes[i];
      for (const auto& [k, w] : n.w1) layer.w1()(i, k) = w;
      for (const auto& [k, w] : n.w2) layer.w2()(i, k) = w;
      for (const auto& [k, w] : n.w3) layer.w3()(i, k) = w;
      layer.b1()[i] = n.b1;
      layer.b2()[i] = n.b2;
      layer.b3()[i] = n.b3;
    }
    layers.push_back(std::move(layer));
  }
  Layer readout(NeuronKind::conventional, width(last), lifted.size(), Activation::identity);
  for (std::size_t o = 0; o < lifted.size(); ++o) {
    for (const auto& [k, w] : lifted[o].terms) readout.w1()(o, k) = w;
    readout.b1()[o] = lifted[o].constant;
  }
  layers.push_back(std::move(readout));
  return Network(std::move(layers));
}

}  // namespace quadnet
