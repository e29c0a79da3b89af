#include <gtest/gtest.h>

#include <cmath>

#include "quadnet/errors.hpp"
#include "quadnet/network.hpp"
#include "quadnet/network_io.hpp"
#include "quadnet/neuron.hpp"
#include "quadnet/sparse_eval.hpp"
#include "test_util.hpp"

using namespace quadnet;
using quadnet::testutil::random_vector;
using quadnet::testutil::rel_err;

TEST(Neuron, PreactivationByHand) {
  const QuadraticParams p{Vector{1.0, 2.0}, 0.5, Vector{-1.0, 1.0}, 2.0, Vector{0.5, -1.0}, 0.25};
  const Vector x{2.0, -1.0};
  // (0.5)(-1) + (0.5*4 - 1*1) + 0.25
  EXPECT_DOUBLE_EQ(quad_preactivation(p, x.span()), 0.75);
  EXPECT_DOUBLE_EQ(conv_preactivation(ConventionalParams{Vector{1.0, 2.0}, 0.5}, x.span()), 0.5);
  EXPECT_DOUBLE_EQ(relu(-0.3), 0.0);
  EXPECT_DOUBLE_EQ(relu(0.3), 0.3);
}

TEST(Neuron, DegenerateMatchesConventionalBitwise) {
  RngStream rng(11);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 1 + rng.below(16);
    const Vector w = random_vector(rng, d, -3.0, 3.0);
    const double b = rng.uniform(-3.0, 3.0);
    const Vector x = random_vector(rng, d, -5.0, 5.0);
    EXPECT_EQ(quad_preactivation(QuadraticParams::degenerate(w, b), x.span()),
              conv_preactivation(ConventionalParams{w, b}, x.span()));
  }
}

TEST(Neuron, RejectsMismatchedShapes) {
  const QuadraticParams p{Vector{1.0, 2.0}, 0.0, Vector{1.0}, 0.0, Vector{1.0, 2.0}, 0.0};
  EXPECT_THROW(p.validate(), ValidationError);
  EXPECT_THROW(quad_preactivation(QuadraticParams::degenerate(Vector{1.0}, 0.0), Vector{1.0, 2.0}.span()),
               ValidationError);
}

TEST(Neuron, GradientsMatchCentralDifferences) {
  RngStream rng(2024);
  const double h = 1e-6;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng.below(16);
    QuadraticParams p{random_vector(rng, d), rng.uniform(-1, 1), random_vector(rng, d), rng.uniform(-1, 1),
                      random_vector(rng, d), rng.uniform(-1, 1)};
    const Vector x = random_vector(rng, d);
    const double up = rng.uniform(0.5, 2.0);
    const QuadraticGrads g = quad_backward(p, x.span(), up);
    auto z = [&](const QuadraticParams& q, const Vector& xx) { return up * quad_preactivation(q, xx.span()); };
    auto check_vec = [&](Vector QuadraticParams::*field, const Vector& grad) {
      for (std::size_t k = 0; k < d; ++k) {
        QuadraticParams a = p, b = p;
        (a.*field)[k] += h;
        (b.*field)[k] -= h;
        EXPECT_LT(rel_err(grad[k], (z(a, x) - z(b, x)) / (2 * h)), 1e-5);
      }
    };
    auto check_scalar = [&](double QuadraticParams::*field, double grad) {
      QuadraticParams a = p, b = p;
      a.*field += h;
      b.*field -= h;
      EXPECT_LT(rel_err(grad, (z(a, x) - z(b, x)) / (2 * h)), 1e-5);
    };
    check_vec(&QuadraticParams::w1, g.w1);
    check_vec(&QuadraticParams::w2, g.w2);
    check_vec(&QuadraticParams::w3, g.w3);
    check_scalar(&QuadraticParams::b1, g.b1);
    check_scalar(&QuadraticParams::b2, g.b2);
    check_scalar(&QuadraticParams::b3, g.b3);
    for (std::size_t k = 0; k < d; ++k) {
      Vector a = x, b = x;
      a[k] += h;
      b[k] -= h;
      EXPECT_LT(rel_err(g.x[k], (z(p, a) - z(p, b)) / (2 * h)), 1e-5);
    }
  }
}

TEST(Network, CountsForPublishedArchitectures) {
  const std::pair<const char*, std::pair<std::size_t, std::size_t>> cases[] = {
      {"Q(20-30-10)", {2820, 2700}},      {"C(20-150-10)", {4660, 4500}},   {"C(20-150-100-10)", {19260, 19000}},
      {"C(500-90-10)", {46000, 45900}},   {"C(500-120-10)", {61330, 61200}}, {"Q(500-30-10)", {46020, 45900}},
  };
  for (const auto& [arch, expected] : cases) {
    const Network net = make_network(parse_arch(arch));
    EXPECT_EQ(param_count(net), expected.first) << arch;
    EXPECT_EQ(flop_count(net), expected.second) << arch;
  }
}

TEST(Network, ParseArch) {
  const ArchSpec a = parse_arch("Q(20-30-10)");
  EXPECT_EQ(a.kind, NeuronKind::quadratic);
  EXPECT_EQ(a.widths, (std::vector<std::size_t>{20, 30, 10}));
  EXPECT_EQ(a.to_string(), "Q(20-30-10)");
  for (const char* bad : {"", "Q", "X(1-2)", "Q(1)", "Q(1-)", "Q(1--2)", "Q(1-a)", "C(0-3)", "Q(2-3"}) {
    EXPECT_THROW(parse_arch(bad), ValidationError) << bad;
  }
}

TEST(Network, ShapeChecks) {
  EXPECT_THROW(Network({Layer(NeuronKind::quadratic, 2, 3, Activation::relu),
                        Layer(NeuronKind::conventional, 4, 1, Activation::identity)}),
               ValidationError);
  const Network net = make_network(parse_arch("C(3-4-2)"));
  EXPECT_THROW(net.forward(Vector{1.0}.span()), ValidationError);
}

namespace {

Network random_network(RngStream& rng, std::size_t in, std::vector<std::size_t> widths, bool quadratic) {
  std::vector<Layer> layers;
  std::size_t prev = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const bool last = i + 1 == widths.size();
    const NeuronKind kind = quadratic && (i % 2 == 0) ? NeuronKind::quadratic : NeuronKind::conventional;
    Layer l(kind, prev, widths[i], last ? Activation::identity : Activation::relu);
    for (double& w : l.w1().flat()) w = rng.uniform(-1, 1);
    for (double& b : l.b1()) b = rng.uniform(-1, 1);
    if (kind == NeuronKind::quadratic) {
      for (double& w : l.w2().flat()) w = rng.uniform(-1, 1);
      for (double& b : l.b2()) b = rng.uniform(-1, 1);
      for (double& w : l.w3().flat()) w = rng.uniform(-1, 1);
      for (double& b : l.b3()) b = rng.uniform(-1, 1);
    }
    layers.push_back(std::move(l));
    prev = widths[i];
  }
  return Network(std::move(layers));
}

}  // namespace

TEST(Network, BackwardMatchesFiniteDifferences) {
  RngStream rng(31);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    Network net = random_network(rng, 4, {5, 3, 2}, true);
    const Vector x = random_vector(rng, 4);
    const Vector dout = random_vector(rng, 2);
    ForwardCache cache;
    net.forward(x.span(), cache);
    Network grad = net.zeros_like();
    const Vector dx = net.backward(cache, dout.span(), grad);
    auto loss = [&](const Network& n, const Vector& xx) { return dot(n.forward(xx.span()).span(), dout.span()); };
    for (std::size_t k = 0; k < 4; ++k) {
      Vector a = x, b = x;
      a[k] += h;
      b[k] -= h;
      EXPECT_NEAR(dx[k], (loss(net, a) - loss(net, b)) / (2 * h), 1e-6);
    }
    auto pb = net.blocks();
    auto gb = grad.blocks();
    ASSERT_EQ(pb.size(), gb.size());
    for (std::size_t blk = 0; blk < pb.size(); ++blk) {
      for (std::size_t i = 0; i < pb[blk].values.size(); ++i) {
        const double keep = pb[blk].values[i];
        pb[blk].values[i] = keep + h;
        const double up = loss(net, x);
        pb[blk].values[i] = keep - h;
        const double down = loss(net, x);
        pb[blk].values[i] = keep;
        EXPECT_NEAR(gb[blk].values[i], (up - down) / (2 * h), 1e-6);
      }
    }
  }
}

TEST(Network, JsonRoundTripProperty) {
  RngStream rng(77);
  for (int t = 0; t < 25; ++t) {
    Network net = random_network(rng, 1 + rng.below(5), {1 + rng.below(4), 1 + rng.below(4), 2}, t % 2 == 0);
    net.layer(0).set_frozen(t % 3 == 0);
    const std::string text = network_to_json(net);
    const Network back = network_from_json(text);
    EXPECT_EQ(back, net);
    EXPECT_EQ(network_to_json(back), text);
  }
  EXPECT_THROW(network_from_json("{\"format\":\"other\"}"), ValidationError);
  EXPECT_THROW(network_from_json("not json"), ValidationError);
}

TEST(Network, JsonFieldOrder) {
  Layer l(NeuronKind::conventional, 1, 1, Activation::identity);
  l.w1()(0, 0) = 0.1;
  l.b1()[0] = -2.0;
  EXPECT_EQ(network_to_json(Network({l})),
            "{\"format\":\"quadnet-network\",\"version\":1,\"layers\":[\n{\"kind\":\"conventional\",\"activation\":"
            "\"identity\",\"frozen\":false,\"in\":1,\"out\":1,\"w1\":[[0.10000000000000001]],\"b1\":[-2]}]}\n");
}

TEST(SparseEval, MatchesDenseBitwise) {
  RngStream rng(5);
  for (int t = 0; t < 20; ++t) {
    Network net = random_network(rng, 3, {6, 4, 2}, true);
    for (Layer& l : net.layers()) {
      for (double& w : l.w1().flat()) {
        if (rng.uniform() < 0.5) w = 0.0;
      }
    }
    const SparseNetwork sparse(net);
    for (int k = 0; k < 50; ++k) {
      const Vector x = random_vector(rng, 3, -2.0, 2.0);
      EXPECT_EQ(sparse.forward(x.span()), net.forward(x.span()));
    }
  }
}
