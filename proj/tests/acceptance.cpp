// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "quadnet/barron.hpp"
#include "quadnet/experiments.hpp"
#include "quadnet/manifold.hpp"
#include "quadnet/network.hpp"
#include "quadnet/neuron.hpp"
#include "quadnet/rng.hpp"
#include "quadnet/sobolev.hpp"
#include "quadnet/training.hpp"

using namespace quadnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_seconds;
  if (!in_time) o.detail += fmt::format("; over the {:.0f} s limit", limit_seconds);
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  fmt::print("criterion {}: {}  {} ({:.2f} s)\n", id, pass ? "PASS" : "FAIL", o.detail, secs);
  std::fflush(stdout);
}

Vector uniform_vector(RngStream& rng, std::size_t n, double lo, double hi) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Advances m through {0..N}^d; false after the last index.
bool advance(MultiIndex& m, int N) {
  for (int& v : m) {
    if (v < N) {
      ++v;
      return true;
    }
    v = 0;
  }
  return false;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

Outcome gadget_exactness() {
  const Network g = product_gadget();
  RngStream rng(1);
  double worst = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    const Vector xy = uniform_vector(rng, 2, -10.0, 10.0);
    worst = std::max(worst, std::abs(network_forward(g, xy.span())[0] - xy[0] * xy[1]));
  }
  return {worst <= 1e-12, fmt::format("max |Q(x,y) - xy| = {:.3e} over 1e4 pairs", worst)};
}

Outcome partition_of_unity() {
  RngStream rng(2);
  double worst_fn = 0.0, worst_net = 0.0;
  const std::pair<std::size_t, std::size_t> cases[] = {{1, 8}, {2, 5}, {3, 3}};
  for (const auto& [d, N] : cases) {
    std::vector<MultiIndex> ms;
    std::vector<Network> nets;
    MultiIndex m(d, 0);
    const MultiIndex zero(d, 0);
    do {
      ms.push_back(m);
      nets.push_back(build_term_network(m, zero, N));
    } while (advance(m, static_cast<int>(N)));
    for (int i = 0; i < 10'000; ++i) {
      const Vector x = uniform_vector(rng, d, 0.0, 1.0);
      double s_fn = 0.0, s_net = 0.0;
      for (std::size_t k = 0; k < ms.size(); ++k) {
        s_fn += phi_m(x.span(), ms[k], N);
        s_net += network_forward(nets[k], x.span())[0];
      }
      worst_fn = std::max(worst_fn, std::abs(s_fn - 1.0));
      worst_net = std::max(worst_net, std::abs(s_net - 1.0));
    }
  }
  const double worst = std::max(worst_fn, worst_net);
  return {worst <= 1e-9, fmt::format("max |sum phi_m - 1| = {:.3e} (bumps), {:.3e} (networks)", worst_fn, worst_net)};
}

Outcome sobolev_end_to_end() {
  struct Case {
    std::string target;
    std::size_t d;
    double amplitude;
    double eps;
  };
  const Case cases[] = {{"sin", 1, 0.1, 0.1}, {"sin", 1, 0.1, 0.05}, {"product", 2, 0.05, 0.1}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const TargetFunction f = make_target(c.target, c.d, 2, c.amplitude);
    ConstructionSpec spec;
    spec.n = 2;
    spec.d = c.d;
    spec.eps = c.eps;
    const ConstructedNetwork net = assemble(f, spec);
    // at least 1e4 grid points in total, and never fewer than 10 N per axis
    const auto per_axis = static_cast<std::size_t>(std::ceil(std::pow(1e4, 1.0 / static_cast<double>(c.d))));
    const double err = sup_error(f, net, std::max(per_axis, 10 * net.N));
    const bool pass = err <= c.eps && net.param_used <= net.param_bound_stated;
    ok = ok && pass;
    detail += fmt::format("{}{}(d={},eps={}): N={} err={:.3e} params={}<={} norm~{:.2f}", detail.empty() ? "" : "; ",
                          c.target, c.d, c.eps, net.N, err, net.param_used, net.param_bound_stated,
                          estimate_sobolev_norm(f, 201));
  }
  return {ok, detail};
}

Outcome hypersphere_table() {
  HypersphereBenchConfig q;
  q.dims = {3, 10, 100};
  q.seeds = 5;
  q.include_conventional = false;
  HypersphereBenchConfig c = q;
  c.dims = {100};
  c.include_conventional = true;
  c.include_quadratic = false;
  std::vector<HypersphereRow> rows = run_hypersphere_benchmark(q);
  for (const HypersphereRow& r : run_hypersphere_benchmark(c)) rows.push_back(r);
  bool ok = true;
  std::string detail;
  for (const HypersphereRow& r : rows) {
    const bool quadratic = r.kind == NeuronKind::quadratic;
    const bool pass = quadratic ? r.acc_mean >= 99.5 : (r.neurons == 350 && r.acc_mean <= 95.0);
    ok = ok && pass;
    detail += fmt::format("{}d={} {}{}: {:.2f}%", detail.empty() ? "" : "; ", r.d, quadratic ? "Q" : "C", r.neurons,
                          r.acc_mean);
  }
  return {ok && rows.size() == 4, detail};
}

Outcome gmm_table() {
  GmmBenchConfig cfg;
  cfg.archs = {"Q(20-30-10)", "C(20-150-10)", "C(20-150-100-10)"};
  cfg.seeds = 5;
  const std::vector<GmmRow> rows = run_gmm_benchmark(cfg);
  const std::pair<std::size_t, std::size_t> counts[] = {{2820, 2700}, {4660, 4500}, {19260, 19000}};
  bool ok = rows.size() == 3;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ok = ok && rows[i].params == counts[i].first && rows[i].flops == counts[i].second;
    detail += fmt::format("{}{} {}/{} {:.2f}%", detail.empty() ? "" : "; ", rows[i].arch, rows[i].params,
                          rows[i].flops, rows[i].acc_mean);
  }
  if (rows.size() == 3) {
    const double gap = rows[0].acc_mean - rows[1].acc_mean;
    ok = ok && gap >= -1.0;
    detail += fmt::format("; Q - C(20-150-10) = {:+.2f} pp", gap);
  }
  return {ok, detail};
}

Outcome barron_rate() {
  bool ok = true;
  std::string detail;
  for (std::size_t d : {4u, 16u}) {
    RngStream rng(42);
    RngStream gen = rng.split("target");
    const BarronTarget t = random_barron_target(d, 8, gen);
    const RateResult r = rate_experiment(t, {8, 16, 32, 64, 128, 256, 512, 1024}, 20, 10'000, rng);
    double worst_ratio = 0.0;
    for (const RateRow& row : r.rows) worst_ratio = std::max(worst_ratio, row.mean_err / row.bound);
    const bool pass = r.slope >= -1.3 && r.slope <= -0.7 && worst_ratio <= 3.0;
    ok = ok && pass;
    detail += fmt::format("{}d={}: slope {:.3f}, max err/bound {:.3f}", detail.empty() ? "" : "; ", d, r.slope,
                          worst_ratio);
  }
  return {ok, detail};
}

Outcome gradient_suite() {
  RngStream rng(2025);
  const double h = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng.below(16);
    const QuadraticParams p{uniform_vector(rng, d, -1, 1), rng.uniform(-1, 1), uniform_vector(rng, d, -1, 1),
                            rng.uniform(-1, 1),             uniform_vector(rng, d, -1, 1), rng.uniform(-1, 1)};
    const Vector x = uniform_vector(rng, d, -1, 1);
    const double up = rng.uniform(0.5, 2.0);
    const QuadraticGrads g = quad_backward(p, x.span(), up);
    auto z = [&](const QuadraticParams& q, const Vector& xx) { return up * quad_preactivation(q, xx.span()); };
    auto vec = [&](Vector QuadraticParams::*field, const Vector& grad) {
      for (std::size_t k = 0; k < d; ++k) {
        QuadraticParams a = p, b = p;
        (a.*field)[k] += h;
        (b.*field)[k] -= h;
        worst = std::max(worst, rel_err(grad[k], (z(a, x) - z(b, x)) / (2 * h)));
      }
    };
    auto scalar = [&](double QuadraticParams::*field, double grad) {
      QuadraticParams a = p, b = p;
      a.*field += h;
      b.*field -= h;
      worst = std::max(worst, rel_err(grad, (z(a, x) - z(b, x)) / (2 * h)));
    };
    vec(&QuadraticParams::w1, g.w1);
    vec(&QuadraticParams::w2, g.w2);
    vec(&QuadraticParams::w3, g.w3);
    scalar(&QuadraticParams::b1, g.b1);
    scalar(&QuadraticParams::b2, g.b2);
    scalar(&QuadraticParams::b3, g.b3);
    for (std::size_t k = 0; k < d; ++k) {
      Vector a = x, b = x;
      a[k] += h;
      b[k] -= h;
      worst = std::max(worst, rel_err(g.x[k], (z(p, a) - z(p, b)) / (2 * h)));
    }
  }
  return {worst < 1e-5, fmt::format("max relative error {:.3e} over 100 instances", worst)};
}

Outcome relinear_equivalence() {
  RngStream rng(3);
  const Network q = relinear_init(make_network(parse_arch("Q(16-32-16-4)")), rng);
  std::vector<Layer> twin;
  for (const Layer& l : q.layers()) {
    Layer c(NeuronKind::conventional, l.in_dim(), l.out_dim(), l.activation());
    c.w1() = l.w1();
    c.b1() = l.b1();
    twin.push_back(std::move(c));
  }
  const Network c(std::move(twin));
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vector x = uniform_vector(rng, 16, -3.0, 3.0);
    const Vector a = q.forward(x.span());
    const Vector b = c.forward(x.span());
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }

  HyperspheresConfig data;
  data.d = 2;
  data.n_per_class = 200;
  RngStream gen(4);
  const Dataset ds = gen_hyperspheres(data, gen);
  RngStream init_rng(5);
  const Network init = relinear_init(make_network(parse_arch("Q(2-8-2)")), init_rng);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.lr_quadratic = 0.0;
  const TrainResult r = train(init, ds, ds, cfg);
  bool frozen = true;
  for (std::size_t i = 0; i < init.depth(); ++i) {
    const Layer& a = r.net.layer(i);
    const Layer& b = init.layer(i);
    frozen = frozen && a.w2() == b.w2() && a.b2() == b.b2() && a.w3() == b.w3() && a.b3() == b.b3();
  }
  return {worst <= 1e-12 && frozen,
          fmt::format("max |quadratic - conventional| = {:.3e}; quadratic terms {} after 10 epochs", worst,
                      frozen ? "unchanged" : "CHANGED")};
}

Outcome circle_demo() {
  const ManifoldSpec spec = circle_atlas();
  // 0.1 cos(theta) at (cos theta, sin theta)
  const auto h = [](std::span<const double> x) { return 0.1 * x[0]; };
  const ManifoldApproximation a = build_manifold_approximator(h, spec, 0.1);
  const double err = manifold_sup_error(h, spec, a.net, 2500);  // 4 charts x 2500 = 1e4 points
  RngStream rng(6);
  double leak = 0.0;
  for (std::size_t i = 0; i < spec.charts.size(); ++i) {
    const Chart& c = spec.charts[i];
    std::size_t outside = 0;
    while (outside < 10'000) {
      const Vector x = uniform_vector(rng, 2, -2.5, 2.5);
      if (radial(c, x.span()) <= c.radius * c.radius) continue;
      leak = std::max(leak, std::abs(network_forward(a.charts[i].net, x.span())[0]));
      ++outside;
    }
  }
  return {err <= 0.1 && leak == 0.0,
          fmt::format("sampled sup error {:.3e}, max truncated term outside its ball {:.1e}, {} params", err, leak,
                      a.param_used)};
}

}  // namespace

int main() {
  criterion(1, 1.0, gadget_exactness);
  criterion(2, 5.0, partition_of_unity);
  criterion(3, 30.0, sobolev_end_to_end);
  criterion(4, 300.0, hypersphere_table);
  criterion(5, 600.0, gmm_table);
  criterion(6, 120.0, barron_rate);
  criterion(7, 5.0, gradient_suite);
  criterion(8, INFINITY, relinear_equivalence);
  criterion(9, 60.0, circle_demo);
  fmt::print("{} of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
