#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadnet/linalg.hpp"
#include "quadnet/network.hpp"
#include "quadnet/sobolev.hpp"

namespace quadnet {

/// Local chart psi(x) = b (V (x - c) + t) of a d-dimensional manifold in R^D,
/// valid on the ball ||x - c|| <= radius.
struct Chart {
  Vector center;  // c, length D
  double radius = 0.0;
  Matrix rotation;  // V, d x D with orthonormal rows
  double scale = 1.0;
  Vector translation;  // t, length d
  /// Caller-supplied psi^{-1}: [0,1]^d -> R^D. May return nullopt where the
  /// chart parametrization is undefined (such points are skipped).
  std::function<std::optional<Vector>(std::span<const double>)> inverse_map;

  std::size_t ambient_dim() const { return center.size(); }
  std::size_t dim() const { return rotation.rows(); }
  void validate() const;
};

struct ManifoldSpec {
  std::vector<Chart> charts;
  double reach = 1.0;
  /// Partition weights rho_i on the manifold, one per chart.
  std::vector<std::function<double(std::span<const double>)>> partition;
  int n = 2;
  double beta = 0.0;  // reported only
  /// Per-chart bound on the order <= n derivatives of rho_i h o psi_i^{-1}.
  std::vector<double> smoothness;
  /// Constant of the distance-function approximation; no default derivation.
  double c_bound = 1.0;
  /// Enforce reach > 2r for every chart.
  bool strict_reach = true;
  /// Per-chart Taylor term limit passed to the Sobolev builder.
  std::size_t term_cap = 1'000'000;

  std::size_t dim() const;
  std::size_t ambient_dim() const;
  /// Checks chart shapes, reach, and sum_i rho_i = 1 at `samples_per_chart`
  /// points drawn through each chart's inverse map.
  void validate(std::size_t samples_per_chart = 200) const;
};

struct TruncationParams {
  double delta = 0.0;  // ramp width in squared radius
  double radius = 0.0;
  void validate() const;
};

/// b (V (x - c) + t); throws when the result leaves [0,1]^d.
Vector chart_project(const Chart& chart, std::span<const double> x);
/// ||x - c||^2
double radial(const Chart& chart, std::span<const double> x);
/// 1 below r^2 - delta, (r^2 - s) / delta on the ramp, 0 beyond r^2.
double trapezoid(double delta, double r, double s);
/// r (1 - r/tau) eps / (2 c (pi + 1) C_M)
double choose_delta(double eps, double r, double tau, std::size_t num_charts, double c_bound);
/// ceil(area / (r^d T_d)), T_d the volume of the unit d-ball.
std::size_t covering_bound(double area, double r, std::size_t d);

/// Evaluates points of [0,1]^d: a uniform grid for d = 1, seeded uniform
/// samples otherwise.
std::vector<Vector> chart_samples(std::size_t d, std::size_t count, std::uint64_t seed);

struct ChartReport {
  std::size_t chart = 0;
  double budget = 0.0;  // delta = eps / (2 C_M)
  double ramp = 0.0;    // truncation Delta
  std::size_t N = 0;
  double smoothness = 0.0;
  std::size_t params = 0;
  double sampled_error = 0.0;
  Network net;  // this chart's truncated term alone
};

struct ManifoldApproximation {
  Network net;
  std::size_t param_used = 0;
  std::vector<ChartReport> charts;
};

/// Per chart: Sobolev construction of rho_i h o psi_i^{-1} with budget
/// eps / (2 C_M), composed with the chart map, multiplied by the truncation
/// 1_Delta(||x - c_i||^2) through a product gadget; outputs summed.
/// `samples_per_chart` points per chart feed the per-chart error column.
ManifoldApproximation build_manifold_approximator(const std::function<double(std::span<const double>)>& h,
                                                  const ManifoldSpec& spec, double eps,
                                                  std::size_t samples_per_chart = 10'000);

/// max |h - net| over `samples_per_chart` points per chart drawn through the
/// inverse maps.
double manifold_sup_error(const std::function<double(std::span<const double>)>& h, const ManifoldSpec& spec,
                          const Network& net, std::size_t samples_per_chart = 10'000);

/// Per-chart target rho_i h o psi_i^{-1} on [0,1]^d (zero where the inverse
/// map is undefined).
TargetFunction chart_target(const std::function<double(std::span<const double>)>& h, const ManifoldSpec& spec,
                            std::size_t chart);

/// Fills spec.smoothness from sampled derivatives of each chart target.
void estimate_smoothness(ManifoldSpec& spec, const std::function<double(std::span<const double>)>& h,
                         std::size_t samples_per_axis = 200);

/// Inverse of a chart centered on the unit sphere S^d in R^(d+1):
/// p = V^T t + sqrt(1 - |t|^2) c with t = u/b - translation; nullopt once |t| >= 1.
void attach_sphere_inverse(Chart& chart);
/// Inverse of a chart of a flat patch: p = c + V^T (u/b - translation).
void attach_flat_inverse(Chart& chart);
/// rho_i = beta_i / sum_j beta_j with beta_j = (1 - ||x - c_j||^2 / (shrink r_j)^2)_+^power.
std::vector<std::function<double(std::span<const double>)>> bump_partition(const std::vector<Chart>& charts,
                                                                           double shrink, int power);

/// Unit circle with `count` charts centered at angles 2 pi i / count.
ManifoldSpec circle_atlas(std::size_t count = 4, double radius = 0.9, int n = 2);
/// Unit sphere in R^3 with six charts at +-e_k.
ManifoldSpec sphere_atlas(double radius = 0.97, int n = 2);
/// [0,1]^d as a single identity chart.
ManifoldSpec flat_atlas(std::size_t d, int n = 2);

}  // namespace quadnet
