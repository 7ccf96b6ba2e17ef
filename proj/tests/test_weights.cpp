#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "psido/weights.hpp"

using namespace psido;

TEST(Weights, PowerWeightValuesAndFloor) {
  const GridSpec g = make_grid(1, 16, pi);
  const Weight w = make_power_weight(1.5, g);
  EXPECT_NEAR(w.values[8], std::pow(0.5 * g.spacing(), 1.5), 1e-15);  // x = 0
  EXPECT_NEAR(w.values[0], std::pow(pi, 1.5), 1e-13);
  EXPECT_NE(w.regularization, "none");
  EXPECT_EQ(make_power_weight(0.0, g).values, std::vector<double>(16, 1.0));
  EXPECT_THROW(make_power_weight(-1.0, g), Error);
  EXPECT_NO_THROW(make_power_weight(-1.5, make_grid(2, 8, pi)));
  EXPECT_THROW(make_power_weight(-2.0, make_grid(2, 8, pi)), Error);
}

TEST(Weights, MakeWeightValidates) {
  const GridSpec g = make_grid(1, 8, pi);
  EXPECT_THROW(make_weight(std::vector<double>(7, 1.0), g, "short"), Error);
  std::vector<double> v(8, 1.0);
  v[3] = 0.0;
  EXPECT_THROW(make_weight(v, g, "zero"), Error);
  v[3] = INFINITY;
  EXPECT_THROW(make_weight(v, g, "inf"), Error);
}

TEST(ApConstant, ConstantWeightsGiveOne) {
  for (int dim : {1, 2}) {
    const GridSpec g = make_grid(dim, 16, pi);
    const Weight w = make_weight(std::vector<double>(g.size(), 3.7), g, "const");
    for (double p : {1.2, 2.0, 5.0}) EXPECT_NEAR(estimate_ap_constant(w, p, make_dense_family(g)).constant, 1.0, 1e-14);
    EXPECT_NEAR(check_a1(w, make_dyadic_family(g)), 1.0, 1e-14);
  }
}

TEST(ApConstant, MatchesBruteForceOracle) {
  Rng rng(17);
  for (int dim : {1, 2}) {
    const GridSpec g = make_grid(dim, dim == 1 ? 32 : 8, pi);
    std::vector<double> v(g.size());
    for (auto& x : v) x = std::exp(2.0 * rng.normal());
    const Weight w = make_weight(v, g, "lognormal");
    for (auto pol : {BoundaryPolicy::clip, BoundaryPolicy::periodic})
      for (double p : {1.5, 2.0, 3.0}) {
        const CubeFamily f = make_dense_family(g, 2, pol);
        const double got = estimate_ap_constant(w, p, f).constant;
        const double want = oracle::ap_constant(v, p, f);
        EXPECT_NEAR(got / want, 1.0, 1e-13) << "dim=" << dim << " p=" << p;
      }
  }
}

TEST(ApConstant, ArgmaxCubeAttainsTheConstant) {
  const GridSpec g = make_grid(1, 64, pi);
  const Weight w = make_power_weight(0.8, g);
  const CubeFamily f = make_dense_family(g);
  const ApEstimate e = estimate_ap_constant(w, 2.0, f);
  const auto q = oracle::cube(f, e.argmax_cube.center, f.widths()[e.argmax_cube.level]);
  double a = 0.0, b = 0.0;
  for (std::size_t i : q) {
    a += w.values[i];
    b += 1.0 / w.values[i];
  }
  const double k = static_cast<double>(q.size());
  EXPECT_NEAR((a / k) * (b / k), e.constant, 1e-12 * e.constant);
  EXPECT_EQ(e.regularization, w.regularization);
}

TEST(ApConstant, AtLeastOne) {
  Rng rng(3);
  const GridSpec g = make_grid(1, 64, pi);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.uniform(0.01, 10.0);
    const Weight w = make_weight(v, g, "uniform");
    for (double p : {1.1, 2.0, 7.0}) EXPECT_GE(estimate_ap_constant(w, p, make_dyadic_family(g)).constant, 1.0 - 1e-14);
  }
}

TEST(ApConstant, ScaleInvariant) {
  const GridSpec g = make_grid(1, 64, pi);
  const Weight w = make_power_weight(0.7, g);
  const CubeFamily f = make_dyadic_family(g);
  const double base = estimate_ap_constant(w, 2.5, f).constant;
  auto scaled = [&](double c) {
    std::vector<double> v(w.values);
    for (auto& x : v) x *= c;
    return estimate_ap_constant(make_weight(v, g, "scaled"), 2.5, f).constant;
  };
  EXPECT_EQ(scaled(8.0), base);
  EXPECT_EQ(scaled(0.125), base);
  EXPECT_NEAR(scaled(3.3), base, 1e-12 * base);
  EXPECT_NEAR(scaled(1e-5), base, 1e-12 * base);
}

TEST(ApConstant, PowerWeightInsideTheClassIsRefinementStable) {
  // -1 < a < p - 1 = 1.5. Well inside, the estimate barely moves; near the
  // edge the floor at dx/2 converges like dx^{1 - a/(p-1)}, so the increments contract.
  auto ap = [](double a, std::size_t N) {
    const GridSpec g = make_grid(1, N, pi);
    return estimate_ap_constant(make_power_weight(a, g), 2.5, make_dyadic_family(g)).constant;
  };
  EXPECT_LT(ap(0.25, 1024) / ap(0.25, 64), 1.05);
  const double c64 = ap(1.0, 64), c256 = ap(1.0, 256), c1024 = ap(1.0, 1024), c4096 = ap(1.0, 4096);
  EXPECT_LT(c1024 - c256, 0.8 * (c256 - c64));
  EXPECT_LT(c4096 - c1024, 0.8 * (c1024 - c256));
}

TEST(ApConstant, PowerWeightOutsideTheClassGrows) {
  // |x|^1.6 with p = 2.5: the exponent exceeds p - 1, so the constant diverges under refinement
  auto ap = [](std::size_t N) {
    const GridSpec g = make_grid(1, N, pi);
    return estimate_ap_constant(make_power_weight(1.6, g), 2.5, make_dyadic_family(g)).constant;
  };
  const double c64 = ap(64), c256 = ap(256), c1024 = ap(1024);
  EXPECT_GT(c256, c64);
  EXPECT_GT(c1024 - c256, c256 - c64);
  EXPECT_GE(c1024 / c64, 2.0);
}

TEST(ApConstant, OverflowIsReportedNotHidden) {
  const GridSpec g = make_grid(1, 16, pi);
  std::vector<double> v(16, 1.0);
  v[3] = 1e-300;
  const ApEstimate e = estimate_ap_constant(make_weight(v, g, "spike"), 1.01, make_dyadic_family(g));
  EXPECT_TRUE(std::isinf(e.constant));
  EXPECT_FALSE(e.diagnostic.empty());
}

TEST(ApConstant, Errors) {
  const GridSpec g = make_grid(1, 16, pi);
  const Weight w = make_power_weight(0.5, g);
  EXPECT_THROW(estimate_ap_constant(w, 1.0, make_dyadic_family(g)), Error);
  EXPECT_THROW(estimate_ap_constant(w, 2.0, CubeFamily{g, {}, BoundaryPolicy::clip}), Error);
  EXPECT_THROW(estimate_ap_constant(w, 2.0, make_dyadic_family(make_grid(1, 32, pi))), Error);
  EXPECT_THROW(check_a1(w, make_dyadic_family(make_grid(1, 32, pi))), Error);
}

TEST(A1, NegativePowersAreA1PositivePowersAreNot) {
  std::vector<double> neg, pos;
  for (std::size_t N : {64u, 256u, 1024u}) {
    const GridSpec g = make_grid(1, N, pi);
    neg.push_back(check_a1(make_power_weight(-0.5, g), make_dyadic_family(g)));
    pos.push_back(check_a1(make_power_weight(1.0, g), make_dyadic_family(g)));
  }
  EXPECT_LT(neg.back() / neg.front(), 1.1);
  EXPECT_GT(pos[1], 1.5 * pos[0]);
  EXPECT_GT(pos[2], 1.5 * pos[1]);
}

TEST(A1, BoundsEveryApConstant) {
  // avg_Q w <= M w(x) <= A1 w(x) on Q, so [w]_{A_p} <= A1 for every p
  const GridSpec g = make_grid(1, 256, pi);
  for (double a : {-0.8, -0.5, -0.2, 0.0}) {
    const Weight w = make_power_weight(a, g);
    const CubeFamily f = make_dense_family(g);
    const double a1 = check_a1(w, f);
    for (double p : {1.1, 1.5, 2.0, 4.0}) EXPECT_LE(estimate_ap_constant(w, p, f).constant, a1 * (1 + 1e-12));
  }
}

TEST(A1, PowerPMinusOneIsNotABoundBelowTwo) {
  // [w]_{A_p} <= A1^{p-1} fails for p < 2 on |x|^{-1/2}
  const GridSpec g = make_grid(1, 256, pi);
  const Weight w = make_power_weight(-0.5, g);
  const CubeFamily f = make_dense_family(g);
  const double a1 = check_a1(w, f);
  const double ap = estimate_ap_constant(w, 1.2, f).constant;
  EXPECT_GT(ap, std::pow(a1, 0.2));
}

TEST(WeightedNorm, MatchesDefinition) {
  const GridSpec g = make_grid(1, 32, pi);
  const Weight w = make_power_weight(0.5, g);
  const SampledField u = make_test_function(TestFunctionKind::gaussian, {{0, 0}, 0.5, {0, 0}, 1, 0}, g);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), 3.0) * w.values[i] * g.spacing();
  EXPECT_NEAR(weighted_norm(u, w, 3.0), std::cbrt(s), 1e-14);
  const Weight one = make_power_weight(0.0, g);
  EXPECT_NEAR(weighted_norm(u, one, 2.0), lp_norm(u, 2.0), 1e-14);
  EXPECT_THROW(weighted_norm(u, w, INFINITY), Error);
  EXPECT_THROW(weighted_norm(u, w, 0.5), Error);
  EXPECT_THROW(weighted_norm(fft_forward(u), w, 2.0), Error);
}
