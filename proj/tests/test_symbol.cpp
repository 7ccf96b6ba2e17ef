#include <gtest/gtest.h>

#include <cmath>

#include "psido/symbol.hpp"

using namespace psido;

TEST(Symbols, BuiltInValues) {
  EXPECT_EQ(make_constant_symbol(2.0)({0, 0}, {5, 0}), cd(2.0));
  EXPECT_NEAR(make_bessel_symbol(-2.0)({0, 0}, {1, 0}).real(), 0.5, 1e-15);
  const SymbolSpec a = make_miyachi_symbol(-0.25, 0.5, 1.0);
  EXPECT_EQ(a({0, 0}, {0.9, 0}), cd(0.0));
  const cd v = a({0, 0}, {9.0, 0});
  EXPECT_NEAR(std::abs(v - std::pow(9.0, -0.25) * std::polar(1.0, 3.0)), 0.0, 1e-14);
  EXPECT_TRUE(a.x_independent);
  EXPECT_EQ(a.rho, 0.5);
}

TEST(Symbols, MiyachiPreconditions) {
  EXPECT_THROW(make_miyachi_symbol(0.0, 1.0), Error);
  EXPECT_THROW(make_miyachi_symbol(0.0, -0.1), Error);
  EXPECT_THROW(make_miyachi_symbol(0.0, 0.5, 0.0), Error);
}

TEST(Symbols, XModulation) {
  const SymbolSpec base = make_miyachi_symbol(-0.25, 0.5);
  EXPECT_THROW(make_x_dependent_symbol(base, {1.0, 0.5}), Error);
  EXPECT_THROW(make_x_dependent_symbol(base, {0.5, 1.0}), Error);
  const SymbolSpec same = make_x_dependent_symbol(base, {0.0, 0.5});
  EXPECT_TRUE(same.x_independent);
  const SymbolSpec a = make_x_dependent_symbol(base, {0.5, 0.75});
  EXPECT_FALSE(a.x_independent);
  EXPECT_EQ(a.delta, 0.75);
  EXPECT_NE(a({0.3, 0}, {20, 0}), a({0.0, 0}, {20, 0}));
  // modulation factor lies in [1 - eps, 1 + eps]
  for (double x : {-1.0, 0.1, 2.0})
    for (double xi : {3.0, 17.0, 250.0}) {
      const double r = std::abs(a({x, 0}, {xi, 0})) / std::abs(base({x, 0}, {xi, 0}));
      EXPECT_LE(r, 1.5 + 1e-12);
      EXPECT_GE(r, 0.5 - 1e-12);
    }
}

TEST(FiniteDifference, ExactOnPolynomials) {
  SymbolSpec a{[](const Point& x, const Point& xi) { return cd(xi[0] * xi[0] * xi[0] + x[0] * xi[0] * xi[0]); }, 3, 1,
               0, false, "poly"};
  DerivativeIndex d3{{3, 0}, {0, 0}};
  EXPECT_NEAR(finite_difference(a, {0.4, 0}, {2.0, 0}, d3, 1e-2, 1e-2).real(), 6.0, 1e-6);
  DerivativeIndex mixed{{2, 0}, {1, 0}};
  EXPECT_NEAR(finite_difference(a, {0.4, 0}, {2.0, 0}, mixed, 1e-2, 1e-2).real(), 2.0, 1e-6);
}

TEST(FiniteDifference, MultiIndexEnumeration) {
  EXPECT_EQ(derivative_indices(1, 2).size(), 6u);
  EXPECT_EQ(derivative_indices(2, 1).size(), 5u);
  EXPECT_EQ(derivative_indices(1, 0).size(), 1u);
}

TEST(Certifier, AcceptsTrueClaims) {
  const auto spec = default_sample_spec(1);
  EXPECT_TRUE(certify_class(make_bessel_symbol(-1.0), 3, spec, 0.1).pass);
  EXPECT_TRUE(certify_class(make_miyachi_symbol(-0.25, 0.5), 4, spec, 0.1).pass);
  EXPECT_TRUE(certify_class(make_miyachi_symbol(-0.5, 0.0), 2, spec, 0.1).pass);
  const SymbolSpec x = make_x_dependent_symbol(make_miyachi_symbol(-0.25, 0.5), {0.5, 0.5});
  EXPECT_TRUE(certify_class(x, 2, spec, 0.1).pass);
}

TEST(Certifier, RejectsFalseClaims) {
  const auto spec = default_sample_spec(1);
  // oscillatory symbol claimed with full xi-decay
  const ClassCertificate c = certify_class(with_claim(make_miyachi_symbol(-0.25, 0.5), -0.25, 1.0, 0.0), 2, spec, 0.1);
  EXPECT_FALSE(c.pass);
  EXPECT_FALSE(c.diagnostics.empty());
  // order claimed too low
  EXPECT_FALSE(certify_class(with_claim(make_bessel_symbol(0.0), -0.5, 1.0, 0.0), 1, spec, 0.1).pass);
  // x-growth claimed with delta = 0
  const SymbolSpec x = make_x_dependent_symbol(make_miyachi_symbol(-0.25, 0.5), {0.5, 0.75});
  EXPECT_FALSE(certify_class(with_claim(x, -0.25, 0.5, 0.0), 2, spec, 0.1).pass);
}

TEST(Certifier, TwoDimensionalClaims) {
  const auto spec = default_sample_spec(2);
  EXPECT_TRUE(certify_class(make_miyachi_symbol(-0.5, 0.5), 2, spec, 0.1, 2).pass);
}

TEST(Certifier, Preconditions) {
  auto spec = default_sample_spec(1);
  EXPECT_THROW(certify_class(make_bessel_symbol(0.0), 5, spec, 0.1), Error);
  spec.xi_magnitudes = {4.0, 8.0, 16.0};
  EXPECT_THROW(certify_class(make_bessel_symbol(0.0), 1, spec, 0.1), Error);
}

TEST(Certifier, ReportsConstantsPerMultiIndex) {
  const ClassCertificate c = certify_class(make_bessel_symbol(0.0), 2, default_sample_spec(1), 0.1);
  EXPECT_EQ(c.constants.size(), 6u);
  EXPECT_NEAR(c.constants.at(DerivativeIndex{}), 1.0, 1e-12);
  EXPECT_FALSE(c.sample_set_description.empty());
}
