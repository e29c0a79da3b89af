#include "quadnet/network.hpp"

#include <charconv>

#include "quadnet/errors.hpp"

namespace quadnet {

std::string_view to_string(NeuronKind kind) {
  return kind == NeuronKind::quadratic ? "quadratic" : "conventional";
}

std::string_view to_string(Activation act) { return act == Activation::relu ? "relu" : "identity"; }

NeuronKind parse_neuron_kind(std::string_view text) {
  if (text == "quadratic") return NeuronKind::quadratic;
  if (text == "conventional") return NeuronKind::conventional;
  throw ValidationError("unknown neuron kind '" + std::string(text) + "'");
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::relu;
  if (text == "identity") return Activation::identity;
  throw ValidationError("unknown activation '" + std::string(text) + "'");
}

Layer::Layer(NeuronKind kind, std::size_t in_dim, std::size_t out_dim, Activation act)
    : kind_(kind), activation_(act), in_dim_(in_dim), out_dim_(out_dim), w1_(out_dim, in_dim), b1_(out_dim) {
  if (in_dim == 0 || out_dim == 0) throw ValidationError("layer dimensions must be positive");
  if (kind == NeuronKind::quadratic) {
    w2_ = Matrix(out_dim, in_dim);
    b2_ = Vector(out_dim);
    w3_ = Matrix(out_dim, in_dim);
    b3_ = Vector(out_dim);
  }
}

QuadraticParams Layer::quadratic_neuron(std::size_t i) const {
  if (kind_ != NeuronKind::quadratic) throw ValidationError("layer is not quadratic");
  auto row = [](const Matrix& m, std::size_t r) {
    auto s = m.row(r);
    return Vector(std::vector<double>(s.begin(), s.end()));
  };
  return QuadraticParams{row(w1_, i), b1_[i], row(w2_, i), b2_[i], row(w3_, i), b3_[i]};
}

ConventionalParams Layer::conventional_neuron(std::size_t i) const {
  if (kind_ != NeuronKind::conventional) throw ValidationError("layer is not conventional");
  auto s = w1_.row(i);
  return ConventionalParams{Vector(std::vector<double>(s.begin(), s.end())), b1_[i]};
}

void Layer::set_neuron(std::size_t i, const QuadraticParams& p) {
  if (kind_ != NeuronKind::quadratic) throw ValidationError("layer is not quadratic");
  p.validate();
  if (p.dim() != in_dim_) throw ValidationError("neuron dimension does not match layer input");
  std::copy(p.w1.begin(), p.w1.end(), w1_.row(i).begin());
  std::copy(p.w2.begin(), p.w2.end(), w2_.row(i).begin());
  std::copy(p.w3.begin(), p.w3.end(), w3_.row(i).begin());
  b1_[i] = p.b1;
  b2_[i] = p.b2;
  b3_[i] = p.b3;
}

void Layer::set_neuron(std::size_t i, const ConventionalParams& p) {
  if (kind_ != NeuronKind::conventional) throw ValidationError("layer is not conventional");
  if (p.w.size() != in_dim_) throw ValidationError("neuron dimension does not match layer input");
  std::copy(p.w.begin(), p.w.end(), w1_.row(i).begin());
  b1_[i] = p.b;
}

std::size_t Layer::param_count() const {
  return kind_ == NeuronKind::quadratic ? (3 * in_dim_ + 3) * out_dim_ : (in_dim_ + 1) * out_dim_;
}

std::size_t Layer::flop_count() const {
  return kind_ == NeuronKind::quadratic ? 3 * in_dim_ * out_dim_ : in_dim_ * out_dim_;
}

Vector Layer::forward(std::span<const double> x) const {
  LayerCache cache;
  forward(x, cache);
  return std::move(cache.out);
}

void Layer::forward(std::span<const double> x, LayerCache& cache) const {
  if (x.size() != in_dim_) {
    throw ValidationError("layer forward: input has " + std::to_string(x.size()) + " entries, layer expects " +
                          std::to_string(in_dim_));
  }
  cache.input = Vector(std::vector<double>(x.begin(), x.end()));
  cache.lin1 = Vector(out_dim_);
  cache.pre = Vector(out_dim_);
  cache.out = Vector(out_dim_);
  const bool quad = kind_ == NeuronKind::quadratic;
  if (quad) cache.lin2 = Vector(out_dim_);
  for (std::size_t i = 0; i < out_dim_; ++i) {
    const double l1 = dot(w1_.row(i), x) + b1_[i];
    double z = l1;
    cache.lin1[i] = l1;
    if (quad) {
      const double l2 = dot(w2_.row(i), x) + b2_[i];
      cache.lin2[i] = l2;
      z = l1 * l2 + dot_squared(w3_.row(i), x) + b3_[i];
    }
    cache.pre[i] = z;
    cache.out[i] = activation_ == Activation::relu ? relu(z) : z;
  }
}

Vector Layer::backward(const LayerCache& cache, std::span<const double> dout, Layer& grad) const {
  if (dout.size() != out_dim_) throw ValidationError("layer backward: gradient size mismatch");
  const auto x = cache.input.span();
  Vector dx(in_dim_);
  const bool quad = kind_ == NeuronKind::quadratic;
  for (std::size_t i = 0; i < out_dim_; ++i) {
    double dz = dout[i];
    if (activation_ == Activation::relu && !(cache.pre[i] > 0.0)) dz = 0.0;
    if (dz == 0.0) continue;
    auto w1 = w1_.row(i);
    auto g1 = grad.w1_.row(i);
    if (!quad) {
      for (std::size_t k = 0; k < in_dim_; ++k) {
        g1[k] += dz * x[k];
        dx[k] += dz * w1[k];
      }
      grad.b1_[i] += dz;
      continue;
    }
    const double l1 = cache.lin1[i];
    const double l2 = cache.lin2[i];
    auto w2 = w2_.row(i);
    auto w3 = w3_.row(i);
    auto g2 = grad.w2_.row(i);
    auto g3 = grad.w3_.row(i);
    const double a = dz * l2;
    const double b = dz * l1;
    for (std::size_t k = 0; k < in_dim_; ++k) {
      g1[k] += a * x[k];
      g2[k] += b * x[k];
      g3[k] += dz * x[k] * x[k];
      dx[k] += a * w1[k] + b * w2[k] + 2.0 * dz * w3[k] * x[k];
    }
    grad.b1_[i] += a;
    grad.b2_[i] += b;
    grad.b3_[i] += dz;
  }
  return dx;
}

std::vector<ParamBlock> Layer::blocks() {
  std::vector<ParamBlock> out{{w1_.flat(), false}, {b1_.span(), false}};
  if (kind_ == NeuronKind::quadratic) {
    out.push_back({w2_.flat(), true});
    out.push_back({b2_.span(), true});
    out.push_back({w3_.flat(), true});
    out.push_back({b3_.span(), true});
  }
  return out;
}

Layer Layer::zeros_like() const {
  Layer out(kind_, in_dim_, out_dim_, activation_);
  out.frozen_ = frozen_;
  return out;
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) { validate(); }

std::size_t Network::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t Network::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

void Network::validate() const {
  if (layers_.empty()) throw ValidationError("network has no layers");
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    if (layers_[i].out_dim() != layers_[i + 1].in_dim()) {
      throw ValidationError("network: layer " + std::to_string(i) + " outputs " +
                            std::to_string(layers_[i].out_dim()) + " values but layer " + std::to_string(i + 1) +
                            " expects " + std::to_string(layers_[i + 1].in_dim()));
    }
  }
}

Vector Network::forward(std::span<const double> x) const {
  Vector h(std::vector<double>(x.begin(), x.end()));
  for (const Layer& layer : layers_) h = layer.forward(h.span());
  return h;
}

Vector Network::forward(std::span<const double> x, ForwardCache& cache) const {
  cache.layers.resize(layers_.size());
  std::span<const double> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].forward(h, cache.layers[i]);
    h = cache.layers[i].out.span();
  }
  return cache.layers.back().out;
}

Vector Network::backward(const ForwardCache& cache, std::span<const double> dout, Network& grad) const {
  Vector g(std::vector<double>(dout.begin(), dout.end()));
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i].backward(cache.layers[i], g.span(), grad.layers_[i]);
  }
  return g;
}

Network Network::zeros_like() const {
  std::vector<Layer> out;
  out.reserve(layers_.size());
  for (const Layer& l : layers_) out.push_back(l.zeros_like());
  return Network(std::move(out));
}

std::vector<ParamBlock> Network::blocks() {
  std::vector<ParamBlock> out;
  for (Layer& l : layers_) {
    if (l.frozen()) continue;
    auto b = l.blocks();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

Vector network_forward(const Network& net, std::span<const double> x) { return net.forward(x); }

std::size_t param_count(const Network& net) {
  std::size_t total = 0;
  for (const Layer& l : net.layers()) total += l.param_count();
  return total;
}

std::size_t flop_count(const Network& net) {
  std::size_t total = 0;
  for (const Layer& l : net.layers()) total += l.flop_count();
  return total;
}

std::string ArchSpec::to_string() const {
  std::string out = kind == NeuronKind::quadratic ? "Q(" : "C(";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(widths[i]);
  }
  return out + ")";
}

ArchSpec parse_arch(std::string_view text) {
  auto fail = [&]() -> ArchSpec { throw ValidationError("malformed architecture '" + std::string(text) + "'"); };
  if (text.size() < 4 || text[1] != '(' || text.back() != ')') return fail();
  ArchSpec arch;
  if (text[0] == 'Q') {
    arch.kind = NeuronKind::quadratic;
  } else if (text[0] == 'C') {
    arch.kind = NeuronKind::conventional;
  } else {
    return fail();
  }
  std::string_view body = text.substr(2, text.size() - 3);
  while (!body.empty()) {
    const auto dash = body.find('-');
    const std::string_view token = body.substr(0, dash);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0) return fail();
    arch.widths.push_back(value);
    if (dash == std::string_view::npos) break;
    body.remove_prefix(dash + 1);
    if (body.empty()) return fail();
  }
  if (arch.widths.size() < 2) return fail();
  return arch;
}

Network make_network(const ArchSpec& arch) {
  if (arch.widths.size() < 2) throw ValidationError("architecture needs at least input and output widths");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < arch.widths.size(); ++i) {
    const bool last = i + 2 == arch.widths.size();
    layers.emplace_back(arch.kind, arch.widths[i], arch.widths[i + 1], last ? Activation::identity : Activation::relu);
  }
  return Network(std::move(layers));
}

}  // namespace quadnet
