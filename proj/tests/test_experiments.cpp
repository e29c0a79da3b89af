#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "quadnet/errors.hpp"
#include "quadnet/experiments.hpp"
#include "quadnet/training.hpp"

using namespace quadnet;

namespace {

double row_norm(const Matrix& m, std::size_t i) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * m(i, k);
  return std::sqrt(s);
}

/// Accuracy of assigning each sample the class of the nearest empirical
/// cluster mean (cluster of sample i is i mod K).
double nearest_mean_accuracy(const Dataset& ds, std::size_t clusters) {
  Matrix means(clusters, ds.dim());
  std::vector<double> counts(clusters, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t k = 0; k < ds.dim(); ++k) means(i % clusters, k) += ds.features(i, k);
    counts[i % clusters] += 1.0;
  }
  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t k = 0; k < ds.dim(); ++k) means(c, k) /= counts[c];
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < clusters; ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < ds.dim(); ++k) d += std::pow(ds.features(i, k) - means(c, k), 2);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (static_cast<int>(best % static_cast<std::size_t>(ds.num_classes)) == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace

TEST(Hyperspheres, ExactRadiusWithoutNoise) {
  HyperspheresConfig cfg;
  cfg.d = 5;
  cfg.n_per_class = 300;
  cfg.noise_sigma = 0.0;
  RngStream rng(1);
  const Dataset ds = gen_hyperspheres(cfg, rng);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = ds.labels[i] == 0 ? 1.0 : 0.7;
    EXPECT_NEAR(row_norm(ds.features, i), r, 1e-12);
  }
}

TEST(Hyperspheres, NoiseScaleAndSizes) {
  HyperspheresConfig cfg;
  cfg.d = 3;
  RngStream rng(2);
  const Dataset ds = gen_hyperspheres(cfg, rng);
  ASSERT_EQ(ds.size(), 4000u);
  std::size_t zeros = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != 0) continue;
    ++zeros;
    sum += row_norm(ds.features, i);
  }
  EXPECT_EQ(zeros, 2000u);
  const double mean = sum / static_cast<double>(zeros);
  EXPECT_GE(mean, 0.97);
  EXPECT_LE(mean, 1.03);

  cfg.radius_inner = cfg.radius_outer;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Gmm, SeparationLimits) {
  GmmConfig cfg;
  cfg.d = 6;
  cfg.n = 3000;
  cfg.classes = 3;
  cfg.clusters_per_class = 2;
  cfg.class_sep = 50.0;
  RngStream rng(3);
  EXPECT_GE(nearest_mean_accuracy(gen_gmm(cfg, rng), 6), 0.999);

  cfg.class_sep = 0.0;
  RngStream rng2(4);
  const double chance = nearest_mean_accuracy(gen_gmm(cfg, rng2), 6);
  EXPECT_NEAR(chance, 1.0 / 3.0, 0.05);
}

TEST(Gmm, LayoutAndErrors) {
  GmmConfig cfg;
  cfg.d = 4;
  cfg.n = 100;
  cfg.classes = 5;
  RngStream rng(5);
  const Dataset ds = gen_gmm(cfg, rng);
  ASSERT_EQ(ds.size(), 100u);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(ds.labels[i], static_cast<int>((i % 10) % 5));

  cfg.d = 2;  // 4 vertices for 10 clusters
  EXPECT_THROW(gen_gmm(cfg, rng), ValidationError);
}

TEST(DecisionGrid, ConstantLogits) {
  Layer l(NeuronKind::conventional, 2, 3, Activation::identity);
  l.b1()[2] = 1.0;
  const ClassGrid g = decision_boundary_grid(Network({l}), -1.0, 1.0, -1.0, 1.0, 20);
  ASSERT_EQ(g.cells.size(), 400u);
  for (int c : g.cells) EXPECT_EQ(c, 2);
  EXPECT_DOUBLE_EQ(g.x(0), -1.0);
  EXPECT_DOUBLE_EQ(g.y(19), 1.0);

  Layer three(NeuronKind::conventional, 3, 2, Activation::identity);
  EXPECT_THROW(decision_boundary_grid(Network({three}), -1.0, 1.0, -1.0, 1.0, 20), ValidationError);
}

TEST(DecisionGrid, TrainedNeuronEnclosesInnerClass) {
  HyperspheresConfig data;
  data.d = 2;
  data.n_per_class = 500;
  RngStream gen(6);
  const Dataset ds = gen_hyperspheres(data, gen);
  RngStream split(7);
  const auto [tr, te] = train_test_split(ds, 0.8, split);
  RngStream init(8);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.lr_quadratic = 0.01;
  cfg.seed = 9;
  const TrainResult r = train(relinear_init(single_quadratic_neuron(2), init), tr, te, cfg);
  ASSERT_GE(evaluate(r.net, te), 0.99);

  const ClassGrid g = decision_boundary_grid(r.net, -1.5, 1.5, -1.5, 1.5, 61);
  EXPECT_EQ(g.at(30, 30), 1);
  EXPECT_FALSE(region_touches_border(g, 30, 30));
  EXPECT_EQ(g.at(0, 0), 0);
  EXPECT_TRUE(region_touches_border(g, 0, 0));

  const ClassGrid again = decision_boundary_grid(r.net, -1.5, 1.5, -1.5, 1.5, 61);
  EXPECT_EQ(g.cells, again.cells);
  std::ostringstream a, b;
  write_grid_csv(a, g);
  write_grid_csv(b, again);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "x,y,class");
}

TEST(Benchmarks, GmmCountColumns) {
  GmmBenchConfig cfg;
  cfg.seeds = 1;
  cfg.epochs = 1;
  cfg.data.n = 200;
  const auto rows = run_gmm_benchmark(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].params, 4660u);
  EXPECT_EQ(rows[0].flops, 4500u);
  EXPECT_EQ(rows[1].params, 19260u);
  EXPECT_EQ(rows[1].flops, 19000u);
  EXPECT_EQ(rows[2].params, 2820u);
  EXPECT_EQ(rows[2].flops, 2700u);
  std::ostringstream csv;
  write_gmm_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "structure,params,flops,acc_mean,acc_std");
}

TEST(Benchmarks, HyperspheresIndependentOfJobs) {
  HypersphereBenchConfig cfg;
  cfg.dims = {3, 10};
  cfg.seeds = 2;
  cfg.epochs = 2;
  cfg.data.n_per_class = 200;
  const auto one = run_hypersphere_benchmark(cfg);
  cfg.jobs = 3;
  const auto three = run_hypersphere_benchmark(cfg);
  ASSERT_EQ(one.size(), 4u);
  ASSERT_EQ(one.size(), three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].per_seed, three[i].per_seed);
    EXPECT_EQ(one[i].params, three[i].params);
  }
  // trainable parameters only: the read-out of the single neuron is frozen
  EXPECT_EQ(one[0].params, 3u * 3u + 3u);
  EXPECT_EQ(one[1].params, 4u * 8u + 2u * 9u);
  std::ostringstream csv;
  write_hypersphere_csv(csv, one);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "d,kind,neurons,params,acc_mean,acc_std");
}

TEST(RunJobs, CoversEveryIndexOnce) {
  std::vector<int> hits(17, 0);
  run_jobs(17, 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}
