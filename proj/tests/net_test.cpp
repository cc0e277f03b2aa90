#include "fgsfrql/net.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "support/ref_forward.hpp"

using namespace fgsfrql;

TEST(NetInit, DeterministicForFixedSeed) {
  const NetLayout layout{{4, 8, 6}};
  const ParamVector a = net_init(layout, 7);
  const ParamVector b = net_init(layout, 7);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (size_t i = 0; i < a.values.size(); ++i) EXPECT_EQ(a.values[i], b.values[i]);
  const ParamVector c = net_init(layout, 8);
  EXPECT_NE(a.values, c.values);
}

TEST(NetInit, ParamCountMatchesLayout) {
  EXPECT_EQ(net_init(NetLayout{{4, 8, 6}}, 7).values.size(), 4u * 8 + 8 + 8 * 6 + 6);  // 94
  EXPECT_EQ(NetLayout({4, 8, 6}).param_count(), 94);
}

TEST(NetInit, BiasesZeroAndWeightsInScale) {
  const ParamVector p = net_init(NetLayout{{2, 3}}, 0);
  // layer 0: 6 weights then 3 biases
  for (int i = 0; i < 6; ++i) {
    EXPECT_LE(std::abs(p.values[static_cast<size_t>(i)]), 1.0 / std::sqrt(2.0));
  }
  for (int i = 6; i < 9; ++i) EXPECT_EQ(p.values[static_cast<size_t>(i)], 0.0);
}

TEST(NetInit, RejectsBadLayouts) {
  EXPECT_THROW(net_init(NetLayout{{5}}, 0), ConfigError);
  EXPECT_THROW(net_init(NetLayout{{4, 0, 2}}, 0), ConfigError);
  EXPECT_THROW(net_init(NetLayout{{-1, 2}}, 0), ConfigError);
}

TEST(NetForward, ZeroParamsGiveZeroOutput) {
  ParamVector p = net_init(NetLayout{{3, 5, 4}}, 1);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  const Vec out = net_forward(p, {0.3, -0.7, 2.0});
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(NetForward, SingleAffineIdentityLayer) {
  ParamVector p = net_init(NetLayout{{3, 3}}, 1);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  for (int i = 0; i < 3; ++i) p.values[static_cast<size_t>(i * 3 + i)] = 1.0;
  const Vec in{0.25, -1.5, 3.0};
  EXPECT_EQ(net_forward(p, in), in);
}

TEST(NetForward, MatchesIndependentReference) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> widths{2 + rng.uniform_int(6), 2 + rng.uniform_int(8),
                                  2 + rng.uniform_int(8), 1 + rng.uniform_int(6)};
    ParamVector p = net_init(NetLayout{widths}, rng.next_u64());
    for (double& v : p.values) v += rng.uniform(-0.5, 0.5);
    Vec in(static_cast<size_t>(widths[0]));
    for (double& v : in) v = rng.uniform(-2.0, 2.0);
    const Vec got = net_forward(p, in);
    const Vec want = ref::forward(widths, p.values, in);
    ASSERT_EQ(got.size(), want.size());
    for (size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(NetForward, DeterministicBitwise) {
  const ParamVector p = net_init(NetLayout{{4, 6, 3}}, 9);
  const Vec in{0.1, 0.2, 0.3, 0.4};
  const Vec a = net_forward(p, in);
  const Vec b = net_forward(p, in);
  EXPECT_EQ(a, b);
}

TEST(NetForward, RejectsWidthMismatch) {
  const ParamVector p = net_init(NetLayout{{4, 6, 3}}, 9);
  EXPECT_THROW(net_forward(p, {1.0, 2.0}), ShapeError);
}

TEST(NetBackward, ZeroCotangentGivesZeroGradient) {
  const ParamVector p = net_init(NetLayout{{3, 4, 2}}, 5);
  const NetGradient g = net_backward(p, {1.0, 2.0, 3.0}, {0.0, 0.0});
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(NetBackward, LinearInCotangent) {
  Rng rng(7);
  ParamVector p = net_init(NetLayout{{3, 5, 4}}, 11);
  for (double& v : p.values) v += rng.uniform(-0.5, 0.5);
  const Vec in{0.4, -0.2, 0.9};
  Vec c1(4), c2(4);
  for (double& v : c1) v = rng.uniform(-1.0, 1.0);
  for (double& v : c2) v = rng.uniform(-1.0, 1.0);
  Vec c12(4);
  for (size_t i = 0; i < 4; ++i) c12[i] = c1[i] + c2[i];
  const NetGradient g1 = net_backward(p, in, c1);
  const NetGradient g2 = net_backward(p, in, c2);
  const NetGradient g12 = net_backward(p, in, c12);
  for (size_t i = 0; i < g12.values.size(); ++i)
    EXPECT_NEAR(g12.values[i], g1.values[i] + g2.values[i], 1e-12);
}

// property: analytic gradients match central differences over seeded random
// nets with widths <= 16 and depth <= 3
TEST(NetBackward, MatchesFiniteDifferences) {
  Rng rng(12345);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> widths{1 + rng.uniform_int(16), 1 + rng.uniform_int(16)};
    if (rng.uniform() < 0.6) widths.push_back(1 + rng.uniform_int(16));
    if (rng.uniform() < 0.3) widths.insert(widths.begin() + 1, 1 + rng.uniform_int(16));
    ParamVector p = net_init(NetLayout{widths}, rng.next_u64());
    for (double& v : p.values) v += rng.uniform(-0.6, 0.6);
    Vec in(static_cast<size_t>(widths.front()));
    for (double& v : in) v = rng.uniform(-1.5, 1.5);
    Vec cot(static_cast<size_t>(widths.back()));
    for (double& v : cot) v = rng.uniform(-1.0, 1.0);

    const NetGradient analytic = net_backward(p, in, cot);
    const NetGradient fd = finite_diff_grad(
        [&](const ParamVector& q) { return dot(cot, net_forward(q, in)); }, p, 1e-5);
    double diff = 0.0;
    for (size_t i = 0; i < analytic.values.size(); ++i) {
      const double e = analytic.values[i] - fd.values[i];
      diff += e * e;
    }
    const double denom = std::max({l2_norm(analytic.values), l2_norm(fd.values), 1e-12});
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(FiniteDiff, QuadraticLossRecoversParams) {
  ParamVector p = net_init(NetLayout{{3, 4}}, 3);
  Rng rng(9);
  for (double& v : p.values) v = rng.uniform(-1.0, 1.0);
  const NetGradient g = finite_diff_grad(
      [](const ParamVector& q) {
        double s = 0.0;
        for (double v : q.values) s += v * v;
        return 0.5 * s;
      },
      p, 1e-5);
  for (size_t i = 0; i < p.values.size(); ++i) EXPECT_NEAR(g.values[i], p.values[i], 1e-9);
}

TEST(FiniteDiff, ConstantLossGivesZero) {
  const ParamVector p = net_init(NetLayout{{3, 4}}, 3);
  const NetGradient g = finite_diff_grad([](const ParamVector&) { return 4.2; }, p, 1e-5);
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, RejectsNonPositiveEps) {
  const ParamVector p = net_init(NetLayout{{2, 2}}, 0);
  EXPECT_THROW(finite_diff_grad([](const ParamVector&) { return 0.0; }, p, 0.0), ConfigError);
}

TEST(FiniteDiff, NonFiniteLossIsNumericError) {
  const ParamVector p = net_init(NetLayout{{2, 2}}, 0);
  EXPECT_THROW(
      finite_diff_grad([](const ParamVector&) { return std::numeric_limits<double>::infinity(); },
                       p, 1e-5),
      NumericError);
}

TEST(SgdStep, ZeroGradientLeavesParams) {
  const ParamVector p = net_init(NetLayout{{4, 3}}, 2);
  const NetGradient g{p.layout, Vec(p.values.size(), 0.0)};
  EXPECT_EQ(sgd_step(p, g, 0.5).values, p.values);
}

TEST(SgdStep, UnitStepFromZeroIsNegatedGradient) {
  ParamVector p = net_init(NetLayout{{4, 3}}, 2);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  NetGradient g{p.layout, Vec(p.values.size())};
  Rng rng(4);
  for (double& v : g.values) v = rng.uniform(-1.0, 1.0);
  const ParamVector out = sgd_step(p, g, 1.0);
  for (size_t i = 0; i < out.values.size(); ++i) EXPECT_EQ(out.values[i], -g.values[i]);
}

TEST(SgdStep, TwoHalfStepsEqualOneFullStep) {
  ParamVector p = net_init(NetLayout{{4, 3}}, 2);
  NetGradient g{p.layout, Vec(p.values.size())};
  Rng rng(4);
  for (double& v : g.values) v = rng.uniform(-1.0, 1.0);
  const ParamVector two = sgd_step(sgd_step(p, g, 0.05), g, 0.05);
  const ParamVector one = sgd_step(p, g, 0.1);
  for (size_t i = 0; i < one.values.size(); ++i) EXPECT_NEAR(two.values[i], one.values[i], 1e-15);
}

TEST(SgdStep, RejectsLayoutMismatch) {
  const ParamVector p = net_init(NetLayout{{4, 3}}, 2);
  const NetGradient g{NetLayout{{3, 4}}, Vec(p.values.size(), 0.0)};
  EXPECT_THROW(sgd_step(p, g, 0.1), ShapeError);
}

TEST(SgdStep, NonFiniteResultIsNumericError) {
  const ParamVector p = net_init(NetLayout{{2, 2}}, 0);
  NetGradient g{p.layout, Vec(p.values.size(), std::numeric_limits<double>::infinity())};
  EXPECT_THROW(sgd_step(p, g, 1.0), NumericError);
}

// tanh has a continuous second derivative; probe d2/dx2 on a grid and compare
// against the analytic form
TEST(Activation, SecondDerivativeContinuous) {
  const double h = 1e-4;
  for (double x = -3.0; x <= 3.0; x += 0.17) {
    const double fd2 = (std::tanh(x + h) - 2.0 * std::tanh(x) + std::tanh(x - h)) / (h * h);
    const double t = std::tanh(x);
    const double analytic = -2.0 * t * (1.0 - t * t);
    EXPECT_NEAR(fd2, analytic, 1e-5);
  }
}

TEST(Serialization, RoundTripsExactly) {
  ParamVector p = net_init(NetLayout{{5, 7, 3}}, 77);
  Rng rng(5);
  for (double& v : p.values) v += rng.uniform(-2.0, 2.0);
  std::stringstream ss;
  save_params(ss, p);
  const ParamVector q = load_params(ss);
  EXPECT_EQ(q.layout.widths, p.layout.widths);
  EXPECT_EQ(q.values, p.values);
}
