#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "quadnet/dataset.hpp"
#include "quadnet/network.hpp"
#include "quadnet/rng.hpp"

namespace quadnet {

struct TrainConfig {
  double lr = 0.01;
  /// Rate for the quadratic terms w2, b2, w3, b3 (two-rate ReLinear update).
  double lr_quadratic = 1e-4;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  std::optional<double> clip_norm;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam moments, stored as networks shaped like the parameters.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  Network m;
  Network v;

  static AdamState for_network(const Network& net);
};

/// Fan-in uniform init for w1, b1 in U(-1/sqrt(in), 1/sqrt(in)); every
/// quadratic neuron gets w2 = 0, b2 = 1, w3 = 0, b3 = 0 so the network starts
/// out computing exactly its conventional counterpart. Frozen layers are left
/// untouched.
Network relinear_init(Network net, RngStream& rng);

struct LossResult {
  double loss = 0.0;
  Vector dlogits;
};

/// Softmax cross-entropy with log-sum-exp stabilization.
LossResult cross_entropy_loss(std::span<const double> logits, int label);

/// One bias-corrected Adam update. Quadratic-term blocks use `lr_quadratic`.
void adam_step(AdamState& state, Network& params, Network& grads, double lr, double lr_quadratic);

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double grad_clip(Network& grads, double max_norm);
double grad_clip(std::span<double> grads, double max_norm);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  Network net;
  std::vector<EpochRecord> history;
};

TrainResult train(Network net, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

/// Argmax of the logits; ties go to the lower class index.
std::size_t predict(const Network& net, std::span<const double> x);
double evaluate(const Network& net, const Dataset& ds);

/// `epoch,train_loss,train_acc,val_acc`
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace quadnet
