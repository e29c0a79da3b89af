#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadnet/circuit.hpp"
#include "quadnet/network.hpp"

namespace quadnet {

using MultiIndex = std::vector<int>;

/// f on [0,1]^d, optionally with exact partial derivatives.
struct TargetFunction {
  std::size_t d = 1;
  int n = 1;
  std::function<double(std::span<const double>)> eval;
  /// D^alpha f(x); when absent, derivatives come from finite differences.
  std::function<double(std::span<const int>, std::span<const double>)> deriv;
  double asserted_sobolev_norm = 1.0;

  void validate() const;
};

struct ConstructionSpec {
  int n = 1;
  std::size_t d = 1;
  double eps = 0.1;
  /// Grid count per axis; 0 selects choose_n_grid(n, d, eps).
  std::size_t N = 0;
  /// Refuse constructions with more Taylor terms than this.
  std::size_t term_cap = 1'000'000;
};

struct TaylorTerm {
  MultiIndex m;      // grid point, entries in 0..N
  MultiIndex alpha;  // derivative multi-index, |alpha| < n
  double coeff = 0.0;
};

/// Parameter accounting follows the construction: each product gadget costs
/// 4 parameters (two neurons with two unit weights each) and each bump
/// psi(3N x_k - 3m_k) costs 4 (one offset per ReLU). Bumps are shared by all
/// grid cells with the same m_k. Identity carries and the read-out
/// coefficients are not counted; `nonzero_weights` reports every stored
/// non-zero for comparison.
struct ConstructedNetwork {
  Network net;
  std::size_t N = 0;
  int n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  std::size_t products = 0;
  std::size_t bump_units = 0;
  std::size_t param_used = 0;
  /// 4 d^n (N+1)^d (d+n-2), the count reached at the end of the proof.
  std::size_t param_bound = 0;
  /// 4 d^n (N+1)^d (d+n-1), the count in the theorem statement.
  std::size_t param_bound_stated = 0;
  std::size_t nonzero_weights = 0;
  std::vector<TaylorTerm> coeffs;
};

/// psi(x) = 1 for |x| < 1, 0 for |x| > 2, 2 - |x| in between.
double psi(double x);
/// The same bump as four ReLUs: s(x+2) - s(x+1) - s(x-1) + s(x-2).
double psi_relu(double x);
/// prod_k psi(3N(x_k - m_k/N)).
double phi_m(std::span<const double> x, std::span<const int> m, std::size_t N);

/// ceil((n! / (2^d d^n) * eps/2)^(-1/n)).
std::size_t choose_n_grid(int n, std::size_t d, double eps);

/// All alpha in N^d with |alpha| < n, graded then lexicographic.
std::vector<MultiIndex> multi_indices_below(int n, std::size_t d);

/// D^alpha f at a point, from the callback or a tensor-product finite
/// difference with step h (one-sided where a central stencil leaves [0,1]).
double partial_derivative(const TargetFunction& f, std::span<const int> alpha, std::span<const double> x, double h);

/// a_{m,alpha} = D^alpha f(m/N) / alpha!.
double taylor_coeff(const TargetFunction& f, std::span<const int> m, std::span<const int> alpha, std::size_t N);

/// Max over sampled points of |D^alpha f| for all |alpha| <= n (or only
/// |alpha| == n when `top_order_only`).
double estimate_sobolev_norm(const TargetFunction& f, std::size_t samples_per_axis, bool top_order_only = false);

/// Product network on R^2: two quadratic neurons and a (1, -1) read-out.
Network product_gadget();

/// Bump signals psi(3N u_k - 3m_k) shared between terms, keyed by (k, m_k).
using BumpBank = std::map<std::pair<std::size_t, int>, Signal>;

/// Fragment for phi_m(u) (u - m/N)^alpha: left-nested product gadgets over the
/// d bumps then the linear factors, finishing at `final_layer`. `coords` are
/// the d coordinate signals, all on layer 0.
Signal build_term(CircuitBuilder& builder, BumpBank& bumps, const std::vector<Signal>& coords,
                  std::span<const int> m, std::span<const int> alpha, std::size_t N, std::size_t final_layer);
/// Stand-alone network for one term, for testing.
Network build_term_network(std::span<const int> m, std::span<const int> alpha, std::size_t N);

/// Signal for sum_m sum_alpha a_{m,alpha} f_{m,alpha} built on `coords`
/// (affine signals of the builder's inputs, expected in [0,1]^d).
struct SobolevCircuit {
  Signal output;
  std::size_t bump_units = 0;
  std::size_t products = 0;
};
SobolevCircuit build_sobolev_circuit(CircuitBuilder& builder, const std::vector<Signal>& coords,
                                     const std::vector<TaylorTerm>& terms, int n, std::size_t N);

/// Layer index at which every term of a (n, d) construction is complete.
std::size_t sobolev_output_layer(int n, std::size_t d);

std::vector<TaylorTerm> taylor_terms(const TargetFunction& f, int n, std::size_t N, std::size_t term_cap);

ConstructedNetwork assemble(const TargetFunction& f, const ConstructionSpec& spec);

/// max |f - net| over a uniform grid with grid_per_axis points per axis.
double sup_error(const TargetFunction& f, const ConstructedNetwork& c, std::size_t grid_per_axis);

/// Built-in targets with exact derivatives:
///   sin      amplitude * prod_k sin(2 pi x_k)
///   product  amplitude * prod_k x_k
///   linear   amplitude * mean_k x_k
///   const    amplitude
TargetFunction make_target(const std::string& name, std::size_t d, int n, double amplitude);

}  // namespace quadnet
