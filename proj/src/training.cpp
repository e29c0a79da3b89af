#include "quadnet/training.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "quadnet/errors.hpp"
#include "quadnet/format.hpp"

namespace quadnet {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("train config: lr must be positive");
  if (!(lr_quadratic >= 0.0)) throw ValidationError("train config: lr_quadratic must be non-negative");
  if (batch_size < 1) throw ValidationError("train config: batch_size must be at least 1");
  if (clip_norm && !(*clip_norm > 0.0)) throw ValidationError("train config: clip_norm must be positive");
}

AdamState AdamState::for_network(const Network& net) {
  AdamState s;
  s.m = net.zeros_like();
  s.v = net.zeros_like();
  return s;
}

Network relinear_init(Network net, RngStream& rng) {
  for (Layer& l : net.layers()) {
    if (l.frozen()) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_dim()));
    for (double& w : l.w1().flat()) w = rng.uniform(-bound, bound);
    for (double& b : l.b1()) b = rng.uniform(-bound, bound);
    if (l.kind() == NeuronKind::quadratic) {
      for (double& w : l.w2().flat()) w = 0.0;
      for (double& b : l.b2()) b = 1.0;
      for (double& w : l.w3().flat()) w = 0.0;
      for (double& b : l.b3()) b = 0.0;
    }
  }
  return net;
}

LossResult cross_entropy_loss(std::span<const double> logits, int label) {
  if (logits.size() < 2) throw ValidationError("cross_entropy_loss: need at least two classes");
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw ValidationError("cross_entropy_loss: label " + std::to_string(label) + " out of range");
  }
  double peak = logits[0];
  for (double z : logits) peak = std::max(peak, z);
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  const double log_norm = peak + std::log(total);
  LossResult r;
  r.loss = log_norm - logits[static_cast<std::size_t>(label)];
  r.dlogits = Vector(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) r.dlogits[c] = std::exp(logits[c] - log_norm);
  r.dlogits[static_cast<std::size_t>(label)] -= 1.0;
  return r;
}

void adam_step(AdamState& state, Network& params, Network& grads, double lr, double lr_quadratic) {
  auto p = params.blocks();
  auto g = grads.blocks();
  auto m = state.m.blocks();
  auto v = state.v.blocks();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ValidationError("adam_step: parameter/gradient/state shapes differ");
  }
  for (std::size_t b = 0; b < g.size(); ++b) {
    if (g[b].values.size() != p[b].values.size()) throw ValidationError("adam_step: block size mismatch");
    for (double x : g[b].values) {
      if (!std::isfinite(x)) throw NumericalError("adam_step: non-finite gradient");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double rate = p[b].quadratic_term ? lr_quadratic : lr;
    auto pv = p[b].values;
    auto gv = g[b].values;
    auto mv = m[b].values;
    auto vv = v[b].values;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = state.beta1 * mv[i] + (1.0 - state.beta1) * gv[i];
      vv[i] = state.beta2 * vv[i] + (1.0 - state.beta2) * gv[i] * gv[i];
      if (rate == 0.0) continue;
      const double mhat = mv[i] / c1;
      const double vhat = vv[i] / c2;
      pv[i] -= rate * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double grad_clip(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ValidationError("grad_clip: max_norm must be positive");
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

double grad_clip(Network& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ValidationError("grad_clip: max_norm must be positive");
  auto blocks = grads.blocks();
  double sq = 0.0;
  for (const auto& b : blocks)
    for (double g : b.values) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& b : blocks)
      for (double& g : b.values) g *= scale;
  }
  return norm;
}

std::size_t predict(const Network& net, std::span<const double> x) {
  const Vector logits = net.forward(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return best;
}

double evaluate(const Network& net, const Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    correct += predict(net, ds.features.row(i)) == static_cast<std::size_t>(ds.labels[i]);
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

namespace {

void zero(Network& grads) {
  for (auto& b : grads.blocks()) std::fill(b.values.begin(), b.values.end(), 0.0);
}

void scale(Network& grads, double s) {
  for (auto& b : grads.blocks())
    for (double& g : b.values) g *= s;
}

}  // namespace

TrainResult train(Network net, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  cfg.validate();
  train_set.validate();
  if (train_set.size() == 0) throw ValidationError("train: empty training set");
  if (train_set.dim() != net.input_dim()) throw ValidationError("train: dataset dimension does not match network input");
  if (static_cast<std::size_t>(train_set.num_classes) > net.output_dim()) {
    throw ValidationError("train: network has fewer outputs than classes");
  }

  TrainResult result;
  AdamState adam = AdamState::for_network(net);
  Network grads = net.zeros_like();
  ForwardCache cache;
  const RngStream shuffle_root = RngStream(cfg.seed).split("epoch-shuffle");
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng = shuffle_root.split(epoch);
    shuffle(order, rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      zero(grads);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const Vector logits = net.forward(train_set.features.row(i), cache);
        const LossResult lr = cross_entropy_loss(logits.span(), train_set.labels[i]);
        if (!std::isfinite(lr.loss)) throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));
        loss_sum += lr.loss;
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.size(); ++c) {
          if (logits[c] > logits[best]) best = c;
        }
        correct += best == static_cast<std::size_t>(train_set.labels[i]);
        net.backward(cache, lr.dlogits.span(), grads);
      }
      scale(grads, 1.0 / static_cast<double>(end - start));
      if (cfg.clip_norm) grad_clip(grads, *cfg.clip_norm);
      adam_step(adam, net, grads, cfg.lr, cfg.lr_quadratic);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    rec.val_acc = evaluate(net, val_set);
    result.history.push_back(rec);
  }
  result.net = std::move(net);
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << fmt17(r.train_loss) << ',' << fmt17(r.train_acc) << ',' << fmt17(r.val_acc) << '\n';
  }
}

}  // namespace quadnet
