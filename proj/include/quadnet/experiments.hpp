#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "quadnet/dataset.hpp"
#include "quadnet/network.hpp"
#include "quadnet/rng.hpp"

namespace quadnet {

struct HyperspheresConfig {
  std::size_t d = 3;
  std::size_t n_per_class = 2000;
  double radius_outer = 1.0;  // class 0
  double radius_inner = 0.7;  // class 1
  double noise_sigma = 0.03;
  double split = 0.8;
  void validate() const;
};

struct GmmConfig {
  std::size_t d = 20;
  std::size_t n = 5000;
  int classes = 10;
  std::size_t clusters_per_class = 2;
  double class_sep = 1.0;
  double split = 0.8;
  void validate() const;
};

/// Points radius * u + N(0, sigma^2 I) with u uniform on the unit sphere;
/// class 0 then class 1.
Dataset gen_hyperspheres(const HyperspheresConfig& cfg, RngStream& rng);

/// Cluster means at distinct random vertices of the cube [-sep, sep]^d, unit
/// normal noise, sample i in cluster i mod K, cluster j in class j mod classes.
Dataset gen_gmm(const GmmConfig& cfg, RngStream& rng);

/// One quadratic neuron z(x) feeding a frozen read-out (z, -z).
Network single_quadratic_neuron(std::size_t d);

/// Runs `count` independent jobs on `jobs` threads (static round-robin
/// assignment); results are stored by job index, so output never depends on
/// the thread count.
void run_jobs(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& job);

struct HypersphereBenchConfig {
  std::vector<std::size_t> dims{3, 10, 20, 100, 200};
  /// Conventional hidden width per dimension.
  std::map<std::size_t, std::size_t> widths{{3, 8}, {10, 40}, {20, 150}, {100, 350}, {200, 700}};
  std::size_t seeds = 5;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double lr = 0.01;
  double lr_quadratic = 0.01;
  bool include_quadratic = true;
  bool include_conventional = true;
  HyperspheresConfig data;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct HypersphereRow {
  std::size_t d = 0;
  NeuronKind kind = NeuronKind::quadratic;
  std::size_t neurons = 0;
  std::size_t params = 0;
  double acc_mean = 0.0;  // percent
  double acc_std = 0.0;
  std::vector<double> per_seed;
};

std::vector<HypersphereRow> run_hypersphere_benchmark(const HypersphereBenchConfig& cfg);
/// `d,kind,neurons,params,acc_mean,acc_std`
void write_hypersphere_csv(std::ostream& out, const std::vector<HypersphereRow>& rows);

struct GmmBenchConfig {
  std::vector<std::string> archs{"C(20-150-10)", "C(20-150-100-10)", "Q(20-30-10)"};
  std::size_t seeds = 5;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double lr = 0.01;
  double lr_quadratic = 1e-4;
  /// d and classes come from each architecture's input and output widths.
  GmmConfig data;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

struct GmmRow {
  std::string arch;
  std::size_t params = 0;
  std::size_t flops = 0;
  double acc_mean = 0.0;  // percent
  double acc_std = 0.0;
  std::vector<double> per_seed;
};

std::vector<GmmRow> run_gmm_benchmark(const GmmBenchConfig& cfg);
/// `structure,params,flops,acc_mean,acc_std`
void write_gmm_csv(std::ostream& out, const std::vector<GmmRow>& rows);

struct ClassGrid {
  std::size_t resolution = 0;
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  std::vector<int> cells;  // row-major, row = y index

  int at(std::size_t ix, std::size_t iy) const { return cells[iy * resolution + ix]; }
  double x(std::size_t ix) const;
  double y(std::size_t iy) const;
};

/// Predicted class on a resolution x resolution lattice over the box.
ClassGrid decision_boundary_grid(const Network& net, double xmin, double xmax, double ymin, double ymax,
                                 std::size_t resolution);
/// `x,y,class`
void write_grid_csv(std::ostream& out, const ClassGrid& grid);
/// Flood fill over same-class cells from (ix, iy): true when the region
/// reaches the lattice border.
bool region_touches_border(const ClassGrid& grid, std::size_t ix, std::size_t iy);

}  // namespace quadnet
