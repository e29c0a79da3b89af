#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "quadnet/errors.hpp"
#include "quadnet/experiments.hpp"
#include "quadnet/training.hpp"
#include "test_util.hpp"

using namespace quadnet;
using quadnet::testutil::random_vector;

TEST(Loss, CrossEntropyValues) {
  const Vector logits{1.0, 2.0, 3.0};
  const LossResult r = cross_entropy_loss(logits.span(), 0);
  EXPECT_NEAR(r.loss, 2.40760596444438, 1e-13);
  EXPECT_NEAR(r.dlogits[0], 0.09003057317038046 - 1.0, 1e-14);
  EXPECT_NEAR(r.dlogits[1], 0.24472847105479767, 1e-14);
  EXPECT_NEAR(r.dlogits[2], 0.6652409557748219, 1e-14);
  // stable for huge logits
  const LossResult big = cross_entropy_loss(Vector{1000.0, 0.0}.span(), 0);
  EXPECT_NEAR(big.loss, 0.0, 1e-12);
  EXPECT_THROW(cross_entropy_loss(logits.span(), 3), ValidationError);
}

TEST(Adam, TwoStepsByHand) {
  Layer l(NeuronKind::conventional, 1, 1, Activation::identity);
  l.w1()(0, 0) = 1.0;
  Network p({l});
  AdamState s = AdamState::for_network(p);
  Network g = p.zeros_like();
  g.layer(0).w1()(0, 0) = 0.5;
  adam_step(s, p, g, 0.01, 0.0);
  EXPECT_NEAR(p.layer(0).w1()(0, 0), 0.9900000002, 1e-15);
  EXPECT_EQ(p.layer(0).b1()[0], 0.0);  // zero gradient: no move
  g.layer(0).w1()(0, 0) = -1.0;
  adam_step(s, p, g, 0.01, 0.0);
  EXPECT_NEAR(p.layer(0).w1()(0, 0), 0.9936610354240566, 1e-15);
}

TEST(Adam, RejectsNonFiniteGradient) {
  Network p({Layer(NeuronKind::conventional, 1, 1, Activation::identity)});
  AdamState s = AdamState::for_network(p);
  Network g = p.zeros_like();
  g.layer(0).b1()[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam_step(s, p, g, 0.01, 0.01), NumericalError);
}

TEST(GradClip, ScalesToMaxNorm) {
  std::vector<double> g{3.0, 4.0};
  EXPECT_DOUBLE_EQ(grad_clip(g, 1.0), 5.0);
  EXPECT_NEAR(std::hypot(g[0], g[1]), 1.0, 1e-12);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  std::vector<double> small{0.1, 0.0};
  grad_clip(small, 1.0);
  EXPECT_EQ(small[0], 0.1);
  EXPECT_THROW(grad_clip(small, 0.0), ValidationError);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = TrainConfig{};
  c.lr = -1.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

namespace {

/// Conventional net with the same w1, b1 as a quadratic one.
Network conventional_twin(const Network& q) {
  std::vector<Layer> layers;
  for (const Layer& l : q.layers()) {
    Layer c(NeuronKind::conventional, l.in_dim(), l.out_dim(), l.activation());
    c.w1() = l.w1();
    c.b1() = l.b1();
    layers.push_back(std::move(c));
  }
  return Network(std::move(layers));
}

Dataset circles(std::uint64_t seed, std::size_t n) {
  HyperspheresConfig cfg;
  cfg.d = 2;
  cfg.n_per_class = n;
  RngStream rng(seed);
  return gen_hyperspheres(cfg, rng);
}

}  // namespace

TEST(ReLinear, InitMatchesConventionalTwin) {
  RngStream rng(3);
  const Network q = relinear_init(make_network(parse_arch("Q(16-32-16-4)")), rng);
  const Network c = conventional_twin(q);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = random_vector(rng, 16, -3.0, 3.0);
    const Vector a = q.forward(x.span());
    const Vector b = c.forward(x.span());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(ReLinear, ZeroQuadraticRateFreezesQuadraticTerms) {
  const Dataset ds = circles(1, 100);
  RngStream rng(4);
  const Network init = relinear_init(make_network(parse_arch("Q(2-4-2)")), rng);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.lr_quadratic = 0.0;
  cfg.batch_size = 16;
  const TrainResult r = train(init, ds, ds, cfg);
  for (std::size_t i = 0; i < init.depth(); ++i) {
    EXPECT_EQ(r.net.layer(i).w2(), init.layer(i).w2());
    EXPECT_EQ(r.net.layer(i).b2(), init.layer(i).b2());
    EXPECT_EQ(r.net.layer(i).w3(), init.layer(i).w3());
    EXPECT_EQ(r.net.layer(i).b3(), init.layer(i).b3());
  }
  EXPECT_NE(r.net.layer(0).w1(), init.layer(0).w1());
}

TEST(Train, DeterministicAndLearnsCircles) {
  const Dataset ds = circles(8, 300);
  RngStream split_rng(9);
  const auto [tr, te] = train_test_split(ds, 0.8, split_rng);
  RngStream rng(10);
  const Network init = relinear_init(single_quadratic_neuron(2), rng);
  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.lr_quadratic = 0.01;
  cfg.seed = 12;
  const TrainResult a = train(init, tr, te, cfg);
  const TrainResult b = train(init, tr, te, cfg);
  EXPECT_EQ(a.net, b.net);
  EXPECT_EQ(a.history, b.history);
  ASSERT_EQ(a.history.size(), 80u);
  EXPECT_GE(evaluate(a.net, te), 0.99);
  // frozen read-out is untouched
  EXPECT_EQ(a.net.layer(1), init.layer(1));
  std::ostringstream csv;
  write_history_csv(csv, a.history);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "epoch,train_loss,train_acc,val_acc");
}

TEST(Train, NonFiniteLossIsNumericalError) {
  Dataset ds = circles(2, 10);
  ds.features(0, 0) = std::numeric_limits<double>::infinity();
  RngStream rng(1);
  const Network init = relinear_init(make_network(parse_arch("C(2-3-2)")), rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train(init, ds, ds, cfg), NumericalError);
}

TEST(Predict, TiesGoToLowerClass) {
  Layer l(NeuronKind::conventional, 2, 3, Activation::identity);
  const Network net({l});
  EXPECT_EQ(predict(net, Vector{1.0, 2.0}.span()), 0u);
}
