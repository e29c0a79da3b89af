#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "quadnet/linalg.hpp"
#include "quadnet/network.hpp"
#include "quadnet/rng.hpp"

namespace quadnet {

/// One quadratic neuron a sigma((w1.x + b1)(w2.x + b2) + w3.(x*x) + b3)
/// carrying probability mass `alpha`.
struct BarronAtom {
  double a = 0.0;
  Vector w1, w2, w3;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double alpha = 0.0;
};

/// Finite-atom Barron function on [0,1]^d.
struct BarronTarget {
  std::size_t d = 0;
  std::vector<BarronAtom> atoms;
  void validate() const;
};

double eval_target(const BarronTarget& t, std::span<const double> x);

/// Norm of this particular representation (an upper bound of the infimum
/// over representations).
double barron_norm(const BarronTarget& t);

/// m atoms drawn i.i.d. by alpha, as Q(d-m) ReLU then a conventional read-out
/// with weights a_k / m.
Network sample_network(const BarronTarget& t, std::size_t m, RngStream& rng);

/// Random target: alpha uniform then normalized, a ~ N(0,1), weights
/// ~ N(0, 1/d), biases ~ N(0,1).
BarronTarget random_barron_target(std::size_t d, std::size_t atoms, RngStream& rng);

struct RateRow {
  std::size_t m = 0;
  double mean_err = 0.0;  // mean over trials of the Monte-Carlo squared L2 error
  double std_err = 0.0;   // sample standard deviation over trials
  double bound = 0.0;     // 2 ||g||^2 / m
};

struct RateResult {
  std::vector<RateRow> rows;
  double slope = 0.0;  // least-squares slope of log mean_err against log m
};

/// Trial t of size m draws from rng.split("m").split(m).split(t); the Monte
/// Carlo points come from rng.split("mc"). `jobs` > 1 runs trials on threads;
/// results do not depend on it.
RateResult rate_experiment(const BarronTarget& t, const std::vector<std::size_t>& m_list, std::size_t trials,
                           std::size_t n_mc, const RngStream& rng, std::size_t jobs = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// `m,mean_err,std_err,bound,slope`
void write_rate_csv(std::ostream& out, const RateResult& r);

}  // namespace quadnet
