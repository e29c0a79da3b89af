#include "quadnet/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quadnet/circuit.hpp"
#include "quadnet/errors.hpp"
#include "quadnet/rng.hpp"
#include "quadnet/sparse_eval.hpp"

namespace quadnet {

void Chart::validate() const {
  const std::size_t D = center.size();
  const std::size_t d = rotation.rows();
  if (D == 0 || d == 0) throw ValidationError("chart: empty center or rotation");
  if (rotation.cols() != D) throw ValidationError("chart: rotation must be d x D");
  if (translation.size() != d) throw ValidationError("chart: translation must have length d");
  if (!(radius > 0.0)) throw ValidationError("chart: radius must be positive");
  if (!(scale > 0.0 && scale <= 1.0)) throw ValidationError("chart: scale must be in (0, 1]");
  if (!inverse_map) throw ValidationError("chart: missing inverse map");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dot(rotation.row(i), rotation.row(j));
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-10) throw ValidationError("chart: rotation rows are not orthonormal");
    }
  }
}

std::size_t ManifoldSpec::dim() const {
  if (charts.empty()) throw ValidationError("manifold: no charts");
  return charts.front().dim();
}

std::size_t ManifoldSpec::ambient_dim() const {
  if (charts.empty()) throw ValidationError("manifold: no charts");
  return charts.front().ambient_dim();
}

void ManifoldSpec::validate(std::size_t samples_per_chart) const {
  if (charts.empty()) throw ValidationError("manifold: no charts");
  if (!(reach > 0.0)) throw ValidationError("manifold: reach must be positive");
  if (n < 1) throw ValidationError("manifold: n must be at least 1");
  if (partition.size() != charts.size()) throw ValidationError("manifold: need one partition weight per chart");
  if (!smoothness.empty() && smoothness.size() != charts.size()) {
    throw ValidationError("manifold: need one smoothness constant per chart");
  }
  if (!(c_bound > 0.0)) throw ValidationError("manifold: c_bound must be positive");
  for (const Chart& c : charts) {
    c.validate();
    if (c.dim() != dim() || c.ambient_dim() != ambient_dim()) throw ValidationError("manifold: charts differ in shape");
    if (strict_reach && !(reach > 2.0 * c.radius)) throw ValidationError("manifold: chart radius must be below reach/2");
  }
  for (std::size_t i = 0; i < charts.size(); ++i) {
    for (const Vector& u : chart_samples(dim(), samples_per_chart, 0x9e3779b9 + i)) {
      const auto x = charts[i].inverse_map(u.span());
      if (!x) continue;
      double total = 0.0;
      for (const auto& rho : partition) total += rho(x->span());
      if (std::abs(total - 1.0) > 1e-6) {
        throw ValidationError("manifold: partition weights sum to " + std::to_string(total) + ", not 1");
      }
    }
  }
}

void TruncationParams::validate() const {
  if (!(delta > 0.0)) throw ValidationError("truncation: delta must be positive");
  if (!(delta < radius * radius)) throw ValidationError("truncation: delta must be below r^2");
}

Vector chart_project(const Chart& chart, std::span<const double> x) {
  if (x.size() != chart.ambient_dim()) throw ValidationError("chart_project: point has the wrong dimension");
  const std::size_t d = chart.dim();
  Vector u(d);
  for (std::size_t k = 0; k < d; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += chart.rotation(k, j) * (x[j] - chart.center[j]);
    u[k] = chart.scale * (acc + chart.translation[k]);
    if (u[k] < -1e-9 || u[k] > 1.0 + 1e-9) throw ValidationError("chart_project: image leaves [0,1]^d");
  }
  return u;
}

double radial(const Chart& chart, std::span<const double> x) {
  if (x.size() != chart.ambient_dim()) throw ValidationError("radial: point has the wrong dimension");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - chart.center[j]) * (x[j] - chart.center[j]);
  return s;
}

double trapezoid(double delta, double r, double s) {
  if (!(delta > 0.0)) throw ValidationError("trapezoid: delta must be positive");
  const double r2 = r * r;
  if (s < r2 - delta) return 1.0;
  if (s > r2) return 0.0;
  return -(s - r2) / delta;
}

double choose_delta(double eps, double r, double tau, std::size_t num_charts, double c_bound) {
  if (!(c_bound > 0.0)) throw ValidationError("choose_delta: c_bound must be positive");
  if (num_charts == 0) throw ValidationError("choose_delta: no charts");
  return r * (1.0 - r / tau) * eps / (2.0 * c_bound * (std::numbers::pi + 1.0) * static_cast<double>(num_charts));
}

std::size_t covering_bound(double area, double r, std::size_t d) {
  const double dd = static_cast<double>(d);
  const double ball = std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
  return static_cast<std::size_t>(std::ceil(area / (std::pow(r, dd) * ball)));
}

std::vector<Vector> chart_samples(std::size_t d, std::size_t count, std::uint64_t seed) {
  std::vector<Vector> out;
  out.reserve(count);
  if (d == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(Vector{count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.5});
    }
    return out;
  }
  RngStream rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    Vector u(d);
    for (std::size_t k = 0; k < d; ++k) u[k] = rng.uniform();
    out.push_back(std::move(u));
  }
  return out;
}

TargetFunction chart_target(const std::function<double(std::span<const double>)>& h, const ManifoldSpec& spec,
                            std::size_t chart) {
  TargetFunction f;
  f.d = spec.dim();
  f.n = spec.n;
  const Chart c = spec.charts.at(chart);
  const auto rho = spec.partition.at(chart);
  f.eval = [c, rho, h](std::span<const double> u) {
    const auto x = c.inverse_map(u);
    if (!x) return 0.0;
    const double w = rho(x->span());
    return w == 0.0 ? 0.0 : w * h(x->span());
  };
  return f;
}

void estimate_smoothness(ManifoldSpec& spec, const std::function<double(std::span<const double>)>& h,
                         std::size_t samples_per_axis) {
  spec.smoothness.clear();
  for (std::size_t i = 0; i < spec.charts.size(); ++i) {
    spec.smoothness.push_back(estimate_sobolev_norm(chart_target(h, spec, i), samples_per_axis));
  }
}

namespace {

struct ChartBuild {
  Signal output;
  std::size_t params = 0;
};

/// Adds one chart's truncated term to `builder`; the result sits one layer
/// past the Sobolev output layer.
ChartBuild add_chart(CircuitBuilder& builder, const Chart& chart, const std::vector<TaylorTerm>& terms, int n,
                     std::size_t N, double ramp) {
  const std::size_t D = chart.ambient_dim();
  const std::size_t d = chart.dim();

  std::vector<Signal> coords;
  for (std::size_t k = 0; k < d; ++k) {
    Signal u{0, {}, 0.0, false};
    double vc = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      if (chart.rotation(k, j) != 0.0) u.terms.emplace_back(j, chart.scale * chart.rotation(k, j));
      vc += chart.rotation(k, j) * chart.center[j];
    }
    u.constant = chart.scale * (chart.translation[k] - vc);
    coords.push_back(u);
  }
  const SobolevCircuit approx = build_sobolev_circuit(builder, coords, terms, n, N);

  // A = (r^2 - ||x - c||^2) / Delta as the quadratic part of one neuron;
  // T = sigma(A) - sigma(A - 1).
  Signal lin{0, {}, 0.0, false};
  std::vector<std::pair<std::size_t, double>> square;
  double cc = 0.0;
  for (std::size_t j = 0; j < D; ++j) {
    if (chart.center[j] != 0.0) lin.terms.emplace_back(j, 2.0 * chart.center[j] / ramp);
    square.emplace_back(j, -1.0 / ramp);
    cc += chart.center[j] * chart.center[j];
  }
  lin.constant = (chart.radius * chart.radius - cc) / ramp;
  const Signal one = builder.constant(1.0, 0);
  Signal cut = builder.quadratic_relu(lin, one, square, 0.0) - builder.quadratic_relu(lin.shifted(-1.0), one, square, 0.0);
  cut.nonnegative = true;

  const std::size_t last = sobolev_output_layer(n, d);
  const Signal term = builder.product(builder.lift(approx.output, last), builder.lift(cut, last));
  const std::size_t truncation_params = 2 * (2 * D + 1);
  return ChartBuild{term, 4 * (approx.products + approx.bump_units) + truncation_params + 4};
}

}  // namespace

ManifoldApproximation build_manifold_approximator(const std::function<double(std::span<const double>)>& h,
                                                  const ManifoldSpec& spec_in, double eps,
                                                  std::size_t samples_per_chart) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("manifold: eps must be in (0,1)");
  ManifoldSpec spec = spec_in;
  spec.validate();
  if (spec.smoothness.empty()) estimate_smoothness(spec, h);

  const std::size_t C = spec.charts.size();
  const double budget = eps / (2.0 * static_cast<double>(C));
  CircuitBuilder builder(spec.ambient_dim());
  ManifoldApproximation result;
  Signal total;
  for (std::size_t i = 0; i < C; ++i) {
    const Chart& chart = spec.charts[i];
    const TruncationParams trunc{choose_delta(eps, chart.radius, spec.reach, C, spec.c_bound), chart.radius};
    trunc.validate();
    const TargetFunction g = chart_target(h, spec, i);
    const double L = std::max(spec.smoothness[i], 1e-12);
    const std::size_t N = choose_n_grid(spec.n, spec.dim(), std::min(budget / L, 0.999));
    const auto terms = taylor_terms(g, spec.n, N, spec.term_cap);

    const ChartBuild joint = add_chart(builder, chart, terms, spec.n, N, trunc.delta);
    total = i == 0 ? joint.output : total + joint.output;

    CircuitBuilder alone(spec.ambient_dim());
    ChartReport report;
    report.chart = i;
    report.budget = budget;
    report.ramp = trunc.delta;
    report.N = N;
    report.smoothness = spec.smoothness[i];
    report.params = joint.params;
    report.net = alone.build({add_chart(alone, chart, terms, spec.n, N, trunc.delta).output});

    const SparseNetwork eval(report.net);
    const auto& rho = spec.partition[i];
    for (const Vector& u : chart_samples(spec.dim(), samples_per_chart, 0x5eed + i)) {
      const auto x = chart.inverse_map(u.span());
      if (!x) continue;
      const double err = std::abs(eval.forward(x->span())[0] - rho(x->span()) * h(x->span()));
      if (!std::isfinite(err)) throw NumericalError("manifold: non-finite network output");
      report.sampled_error = std::max(report.sampled_error, err);
    }
    result.param_used += report.params;
    result.charts.push_back(std::move(report));
  }
  result.net = builder.build({total});
  return result;
}

double manifold_sup_error(const std::function<double(std::span<const double>)>& h, const ManifoldSpec& spec,
                          const Network& net, std::size_t samples_per_chart) {
  const SparseNetwork eval(net);
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.charts.size(); ++i) {
    for (const Vector& u : chart_samples(spec.dim(), samples_per_chart, 0xc0ffee + i)) {
      const auto x = spec.charts[i].inverse_map(u.span());
      if (!x) continue;
      const double err = std::abs(eval.forward(x->span())[0] - h(x->span()));
      if (!std::isfinite(err)) throw NumericalError("manifold: non-finite network output");
      worst = std::max(worst, err);
    }
  }
  return worst;
}

namespace {

/// (1 - s/rs^2)^power on ||x - c||^2 = s < rs^2; C^(power-1) across the edge.
double bump_weight(std::span<const double> x, const Vector& c, double rs, int power) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - c[j]) * (x[j] - c[j]);
  const double t = s / (rs * rs);
  if (t >= 1.0) return 0.0;
  return std::pow(1.0 - t, power);
}

/// Largest tangent-coordinate magnitude inside a ball of chord radius r on a
/// unit sphere, padded so projections stay inside [0,1].
double tangent_extent(double r) { return std::sin(2.0 * std::asin(r / 2.0)) * (1.0 + 1e-6); }

}  // namespace

std::vector<std::function<double(std::span<const double>)>> bump_partition(const std::vector<Chart>& charts,
                                                                           double shrink, int power) {
  if (!(shrink > 0.0 && shrink <= 1.0)) throw ValidationError("partition: shrink must be in (0, 1]");
  if (power < 1) throw ValidationError("partition: power must be positive");
  std::vector<Vector> centers;
  std::vector<double> radii;
  for (const Chart& c : charts) {
    centers.push_back(c.center);
    radii.push_back(c.radius * shrink);
  }
  std::vector<std::function<double(std::span<const double>)>> out;
  for (std::size_t i = 0; i < charts.size(); ++i) {
    out.push_back([centers, radii, i, power](std::span<const double> x) {
      const double own = bump_weight(x, centers[i], radii[i], power);
      if (own == 0.0) return 0.0;
      double total = 0.0;
      for (std::size_t j = 0; j < centers.size(); ++j) total += bump_weight(x, centers[j], radii[j], power);
      return own / total;
    });
  }
  return out;
}

void attach_sphere_inverse(Chart& chart) {
  const Matrix V = chart.rotation;
  const Vector c = chart.center;
  const Vector t = chart.translation;
  const double b = chart.scale;
  chart.inverse_map = [V, c, t, b](std::span<const double> u) -> std::optional<Vector> {
    std::vector<double> local(V.rows());
    double tt = 0.0;
    for (std::size_t k = 0; k < local.size(); ++k) {
      local[k] = u[k] / b - t[k];
      tt += local[k] * local[k];
    }
    if (tt >= 1.0) return std::nullopt;
    const double normal = std::sqrt(1.0 - tt);
    Vector p(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
      double acc = normal * c[j];
      for (std::size_t k = 0; k < local.size(); ++k) acc += V(k, j) * local[k];
      p[j] = acc;
    }
    return p;
  };
}

void attach_flat_inverse(Chart& chart) {
  const Matrix V = chart.rotation;
  const Vector c = chart.center;
  const Vector t = chart.translation;
  const double b = chart.scale;
  chart.inverse_map = [V, c, t, b](std::span<const double> u) -> std::optional<Vector> {
    Vector p = c;
    for (std::size_t k = 0; k < V.rows(); ++k) {
      const double local = u[k] / b - t[k];
      for (std::size_t j = 0; j < c.size(); ++j) p[j] += V(k, j) * local;
    }
    return p;
  };
}

ManifoldSpec circle_atlas(std::size_t count, double radius, int n) {
  if (count < 3) throw ValidationError("circle atlas: need at least 3 charts");
  if (!(radius > 0.0 && radius < 2.0)) throw ValidationError("circle atlas: radius must be in (0, 2)");
  ManifoldSpec spec;
  spec.reach = 1.0;
  spec.n = n;
  spec.strict_reach = false;
  const double s = tangent_extent(radius);
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
    Chart c;
    c.center = Vector{std::cos(theta), std::sin(theta)};
    c.radius = radius;
    c.rotation = Matrix{{-std::sin(theta), std::cos(theta)}};
    c.scale = 1.0 / (2.0 * s);
    c.translation = Vector{s};
    const double b = c.scale;
    c.inverse_map = [theta, b, s](std::span<const double> u) -> std::optional<Vector> {
      const double t = u[0] / b - s;
      if (std::abs(t) > 1.0) return std::nullopt;
      const double phi = theta + std::asin(t);
      return Vector{std::cos(phi), std::sin(phi)};
    };
    spec.charts.push_back(std::move(c));
  }
  spec.partition = bump_partition(spec.charts, 0.98, n + 1);
  return spec;
}

ManifoldSpec sphere_atlas(double radius, int n) {
  ManifoldSpec spec;
  spec.reach = 1.0;
  spec.n = n;
  spec.strict_reach = false;
  const double s = tangent_extent(radius);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0}) {
      Chart c;
      c.center = Vector(3);
      c.center[axis] = sign;
      c.radius = radius;
      c.rotation = Matrix(2, 3);
      c.rotation(0, (axis + 1) % 3) = 1.0;
      c.rotation(1, (axis + 2) % 3) = 1.0;
      c.scale = 1.0 / (2.0 * s);
      c.translation = Vector{s, s};
      attach_sphere_inverse(c);
      spec.charts.push_back(std::move(c));
    }
  }
  spec.partition = bump_partition(spec.charts, 0.975, n + 1);
  return spec;
}

ManifoldSpec flat_atlas(std::size_t d, int n) {
  if (d == 0) throw ValidationError("flat atlas: d must be positive");
  ManifoldSpec spec;
  spec.reach = 1e9;
  spec.n = n;
  Chart c;
  c.center = Vector(d);
  c.translation = Vector(d);
  c.rotation = identity(d);
  for (std::size_t k = 0; k < d; ++k) {
    c.center[k] = 0.5;
    c.translation[k] = 0.5;
  }
  c.radius = 0.5 * std::sqrt(static_cast<double>(d)) + 1.0;
  c.scale = 1.0;
  attach_flat_inverse(c);
  spec.charts.push_back(std::move(c));
  spec.partition.push_back([](std::span<const double>) { return 1.0; });
  return spec;
}

}  // namespace quadnet
