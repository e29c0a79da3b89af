#include "quadnet/sobolev.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "quadnet/errors.hpp"
#include "quadnet/sparse_eval.hpp"

namespace quadnet {

namespace {

double factorial(int k) {
  double out = 1.0;
  for (int i = 2; i <= k; ++i) out *= i;
  return out;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

/// Advances an odometer over {0..limit}^d; returns false after the last value.
bool next_index(MultiIndex& idx, int limit) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (idx[k] < limit) {
      ++idx[k];
      return true;
    }
    idx[k] = 0;
  }
  return false;
}

}  // namespace

void TargetFunction::validate() const {
  if (d < 1) throw ValidationError("target function: d must be at least 1");
  if (n < 1) throw ValidationError("target function: n must be at least 1");
  if (!eval) throw ValidationError("target function: missing evaluator");
}

double psi(double x) {
  const double a = std::abs(x);
  if (a < 1.0) return 1.0;
  if (a > 2.0) return 0.0;
  return 2.0 - a;
}

double psi_relu(double x) { return relu(x + 2.0) - relu(x + 1.0) - relu(x - 1.0) + relu(x - 2.0); }

double phi_m(std::span<const double> x, std::span<const int> m, std::size_t N) {
  if (x.size() != m.size()) throw ValidationError("phi_m: point and grid index differ in dimension");
  const double scale = 3.0 * static_cast<double>(N);
  double out = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    out *= psi(scale * (x[k] - static_cast<double>(m[k]) / static_cast<double>(N)));
  }
  return out;
}

std::size_t choose_n_grid(int n, std::size_t d, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("choose_N: eps must be in (0,1)");
  if (n < 1 || d < 1) throw ValidationError("choose_N: n and d must be positive");
  const double dd = static_cast<double>(d);
  const double base = factorial(n) / (std::pow(2.0, dd) * std::pow(dd, n)) * eps / 2.0;
  return static_cast<std::size_t>(std::ceil(std::pow(base, -1.0 / n)));
}

std::vector<MultiIndex> multi_indices_below(int n, std::size_t d) {
  std::vector<MultiIndex> out;
  for (int order = 0; order < n; ++order) {
    MultiIndex idx(d, 0);
    do {
      int total = 0;
      for (int v : idx) total += v;
      if (total == order) out.push_back(idx);
    } while (next_index(idx, order));
  }
  return out;
}

double partial_derivative(const TargetFunction& f, std::span<const int> alpha, std::span<const double> x, double h) {
  if (alpha.size() != f.d || x.size() != f.d) throw ValidationError("partial_derivative: dimension mismatch");
  if (f.deriv) return f.deriv(alpha, x);
  int order = 0;
  for (int a : alpha) order += a;
  if (order == 0) return f.eval(x);

  // per-axis stencil offsets (in units of h); coefficient (-1)^(j-i) C(j, i)
  std::vector<std::vector<double>> offsets(f.d);
  for (std::size_t k = 0; k < f.d; ++k) {
    const int j = alpha[k];
    double shift = -0.5 * j;
    if (x[k] + shift * h < 0.0) {
      shift = 0.0;  // forward stencil
    } else if (x[k] + (shift + j) * h > 1.0) {
      shift = -static_cast<double>(j);  // backward stencil
    }
    for (int i = 0; i <= j; ++i) offsets[k].push_back(shift + i);
  }
  std::vector<int> pick(f.d, 0);
  std::vector<double> point(f.d);
  double acc = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t k = 0; k < f.d; ++k) {
      const int j = alpha[k];
      const int i = pick[k];
      weight *= (((j - i) % 2) ? -1.0 : 1.0) * binomial(j, i);
      point[k] = x[k] + offsets[k][static_cast<std::size_t>(i)] * h;
    }
    acc += weight * f.eval(point);
    std::size_t k = f.d;
    while (k-- > 0) {
      if (pick[k] < alpha[k]) {
        ++pick[k];
        break;
      }
      pick[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return acc / std::pow(h, order);
}

double taylor_coeff(const TargetFunction& f, std::span<const int> m, std::span<const int> alpha, std::size_t N) {
  if (m.size() != f.d || alpha.size() != f.d) throw ValidationError("taylor_coeff: dimension mismatch");
  int order = 0;
  double alpha_factorial = 1.0;
  for (int a : alpha) {
    order += a;
    alpha_factorial *= factorial(a);
  }
  if (order >= f.n) throw ValidationError("taylor_coeff: |alpha| must be below n");
  std::vector<double> point(f.d);
  for (std::size_t k = 0; k < f.d; ++k) point[k] = static_cast<double>(m[k]) / static_cast<double>(N);
  const double h = 1e-4 / static_cast<double>(std::max<std::size_t>(1, N));
  const double value = partial_derivative(f, alpha, point, h) / alpha_factorial;
  if (!std::isfinite(value)) throw NumericalError("taylor_coeff: non-finite derivative");
  return value;
}

double estimate_sobolev_norm(const TargetFunction& f, std::size_t samples_per_axis, bool top_order_only) {
  f.validate();
  if (samples_per_axis < 2) throw ValidationError("estimate_sobolev_norm: need at least two samples per axis");
  std::vector<MultiIndex> alphas = multi_indices_below(f.n + 1, f.d);
  if (top_order_only) {
    std::erase_if(alphas, [&](const MultiIndex& a) {
      int s = 0;
      for (int v : a) s += v;
      return s != f.n;
    });
  }
  const double h = 1e-4;
  double best = 0.0;
  MultiIndex grid(f.d, 0);
  std::vector<double> x(f.d);
  do {
    for (std::size_t k = 0; k < f.d; ++k) x[k] = static_cast<double>(grid[k]) / static_cast<double>(samples_per_axis - 1);
    for (const auto& a : alphas) best = std::max(best, std::abs(partial_derivative(f, a, x, h)));
  } while (next_index(grid, static_cast<int>(samples_per_axis - 1)));
  return best;
}

Network product_gadget() {
  CircuitBuilder b(2);
  return b.build({b.product(b.input(0), b.input(1))});
}

namespace {

const Signal& bump(CircuitBuilder& builder, BumpBank& bumps, const std::vector<Signal>& coords, std::size_t k,
                   int mk, std::size_t N) {
  const auto key = std::make_pair(k, mk);
  if (auto it = bumps.find(key); it != bumps.end()) return it->second;
  // a = 3N u_k - 3 m_k
  const Signal a = coords[k].scaled(3.0 * static_cast<double>(N)).shifted(-3.0 * mk);
  Signal s = builder.relu(a.shifted(2.0)) - builder.relu(a.shifted(1.0)) - builder.relu(a.shifted(-1.0)) +
             builder.relu(a.shifted(-2.0));
  s.nonnegative = true;
  return bumps.emplace(key, s).first->second;
}

}  // namespace

std::size_t sobolev_output_layer(int n, std::size_t d) { return d + static_cast<std::size_t>(n) - 1; }

Signal build_term(CircuitBuilder& builder, BumpBank& bumps, const std::vector<Signal>& coords,
                  std::span<const int> m, std::span<const int> alpha, std::size_t N, std::size_t final_layer) {
  const std::size_t d = coords.size();
  if (m.size() != d || alpha.size() != d) throw ValidationError("build_term: dimension mismatch");
  for (const Signal& c : coords) {
    if (c.layer != 0) throw ValidationError("build_term: coordinates must be input-layer signals");
  }
  std::vector<Signal> factors;
  for (std::size_t k = 0; k < d; ++k) factors.push_back(bump(builder, bumps, coords, k, m[k], N));
  for (std::size_t k = 0; k < d; ++k) {
    const Signal lin = coords[k].shifted(-static_cast<double>(m[k]) / static_cast<double>(N));
    for (int r = 0; r < alpha[k]; ++r) factors.push_back(lin);
  }
  const std::size_t gadgets = factors.size() - 1;
  if (final_layer < 1 + gadgets) throw ValidationError("build_term: final layer too shallow for this term");
  const std::size_t start = final_layer - gadgets;
  Signal acc = builder.lift(factors.back(), start);
  for (std::size_t j = factors.size() - 1; j-- > 0;) {
    acc = builder.product(builder.lift(factors[j], acc.layer), acc);
  }
  return acc;
}

Network build_term_network(std::span<const int> m, std::span<const int> alpha, std::size_t N) {
  CircuitBuilder b(m.size());
  std::vector<Signal> coords;
  for (std::size_t k = 0; k < m.size(); ++k) coords.push_back(b.input(k));
  BumpBank bumps;
  int order = 0;
  for (int a : alpha) order += a;
  const std::size_t final_layer = m.size() + static_cast<std::size_t>(order);
  return b.build({build_term(b, bumps, coords, m, alpha, N, final_layer)});
}

SobolevCircuit build_sobolev_circuit(CircuitBuilder& builder, const std::vector<Signal>& coords,
                                     const std::vector<TaylorTerm>& terms, int n, std::size_t N) {
  const std::size_t final_layer = sobolev_output_layer(n, coords.size());
  const std::size_t products_before = builder.product_count();
  BumpBank bumps;
  Signal out = builder.constant(0.0, final_layer);
  for (const TaylorTerm& t : terms) {
    if (t.coeff == 0.0) continue;
    out = out + build_term(builder, bumps, coords, t.m, t.alpha, N, final_layer).scaled(t.coeff);
  }
  out.nonnegative = false;
  return SobolevCircuit{out, bumps.size(), builder.product_count() - products_before};
}

std::vector<TaylorTerm> taylor_terms(const TargetFunction& f, int n, std::size_t N, std::size_t term_cap) {
  const auto alphas = multi_indices_below(n, f.d);
  const double cells = std::pow(static_cast<double>(N + 1), static_cast<double>(f.d));
  if (cells * static_cast<double>(alphas.size()) > static_cast<double>(term_cap)) {
    throw ValidationError("construction would need " + std::to_string(static_cast<long long>(cells * alphas.size())) +
                          " terms, above the cap of " + std::to_string(term_cap));
  }
  std::vector<TaylorTerm> out;
  MultiIndex m(f.d, 0);
  do {
    for (const auto& a : alphas) out.push_back(TaylorTerm{m, a, taylor_coeff(f, m, a, N)});
  } while (next_index(m, static_cast<int>(N)));
  return out;
}

ConstructedNetwork assemble(const TargetFunction& f, const ConstructionSpec& spec) {
  f.validate();
  if (spec.d != f.d || spec.n != f.n) throw ValidationError("construction spec does not match the target's (n, d)");
  const std::size_t min_n = choose_n_grid(spec.n, spec.d, spec.eps);
  const std::size_t N = spec.N == 0 ? min_n : spec.N;
  if (N < 1) throw ValidationError("grid count N must be positive");

  ConstructedNetwork c;
  c.N = N;
  c.n = spec.n;
  c.d = spec.d;
  c.eps = spec.eps;
  c.coeffs = taylor_terms(f, spec.n, N, spec.term_cap);

  CircuitBuilder builder(spec.d);
  std::vector<Signal> coords;
  for (std::size_t k = 0; k < spec.d; ++k) coords.push_back(builder.input(k));
  const SobolevCircuit circuit = build_sobolev_circuit(builder, coords, c.coeffs, spec.n, N);
  c.net = builder.build({circuit.output});

  c.products = circuit.products;
  c.bump_units = circuit.bump_units;
  c.param_used = 4 * (c.products + c.bump_units);
  const std::size_t scale = 4 * ipow(spec.d, static_cast<std::size_t>(spec.n)) * ipow(N + 1, spec.d);
  c.param_bound = scale * (spec.d + static_cast<std::size_t>(spec.n) - 2);
  c.param_bound_stated = scale * (spec.d + static_cast<std::size_t>(spec.n) - 1);
  c.nonzero_weights = SparseNetwork(c.net).nonzero_count();
  return c;
}

double sup_error(const TargetFunction& f, const ConstructedNetwork& c, std::size_t grid_per_axis) {
  if (grid_per_axis < 10 * c.N) {
    throw ValidationError("sup_error: grid needs at least 10*N = " + std::to_string(10 * c.N) + " points per axis");
  }
  const SparseNetwork net(c.net);
  MultiIndex grid(f.d, 0);
  std::vector<double> x(f.d);
  double worst = 0.0;
  do {
    for (std::size_t k = 0; k < f.d; ++k) x[k] = static_cast<double>(grid[k]) / static_cast<double>(grid_per_axis - 1);
    const double err = std::abs(f.eval(x) - net.forward(x)[0]);
    if (!std::isfinite(err)) throw NumericalError("sup_error: non-finite network output");
    worst = std::max(worst, err);
  } while (next_index(grid, static_cast<int>(grid_per_axis - 1)));
  return worst;
}

TargetFunction make_target(const std::string& name, std::size_t d, int n, double amplitude) {
  TargetFunction f;
  f.d = d;
  f.n = n;
  if (name == "sin") {
    f.eval = [amplitude](std::span<const double> x) {
      double v = amplitude;
      for (double xk : x) v *= std::sin(2.0 * std::numbers::pi * xk);
      return v;
    };
    f.deriv = [amplitude](std::span<const int> alpha, std::span<const double> x) {
      double v = amplitude;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double w = 2.0 * std::numbers::pi;
        v *= std::pow(w, alpha[k]) * std::sin(w * x[k] + alpha[k] * std::numbers::pi / 2.0);
      }
      return v;
    };
  } else if (name == "product") {
    f.eval = [amplitude](std::span<const double> x) {
      double v = amplitude;
      for (double xk : x) v *= xk;
      return v;
    };
    f.deriv = [amplitude](std::span<const int> alpha, std::span<const double> x) {
      double v = amplitude;
      for (std::size_t k = 0; k < x.size(); ++k) v *= alpha[k] == 0 ? x[k] : (alpha[k] == 1 ? 1.0 : 0.0);
      return v;
    };
  } else if (name == "linear") {
    const double w = amplitude / static_cast<double>(d);
    f.eval = [w](std::span<const double> x) {
      double v = 0.0;
      for (double xk : x) v += xk;
      return w * v;
    };
    f.deriv = [w](std::span<const int> alpha, std::span<const double> x) {
      int order = 0;
      for (int a : alpha) order += a;
      if (order == 0) {
        double v = 0.0;
        for (double xk : x) v += xk;
        return w * v;
      }
      return order == 1 ? w : 0.0;
    };
  } else if (name == "const") {
    f.eval = [amplitude](std::span<const double>) { return amplitude; };
    f.deriv = [amplitude](std::span<const int> alpha, std::span<const double>) {
      for (int a : alpha) {
        if (a != 0) return 0.0;
      }
      return amplitude;
    };
  } else {
    throw ValidationError("unknown target '" + name + "' (expected sin, product, linear or const)");
  }
  return f;
}

}  // namespace quadnet
