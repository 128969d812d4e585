#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "chemostab/model.hpp"

using namespace chemostab;

namespace {

Field random_field(const GridPtr& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(g->size());
  for (auto& x : v) x = dist(rng);
  return Field(g, std::move(v));
}

CoefficientSet random_coefficients(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto profile = [&](double offset) {
    return CoefficientSpec(g, CoefficientSpec::Separable{
                                  TimeFactor::sinusoid(1.0, 0.3 * d(rng), 1.0 + d(rng), d(rng)),
                                  SpatialProfile{SpatialProfile::Cosine{offset, 0.5 * d(rng), {1.0, 1.0}}}});
  };
  return CoefficientSet(profile(1.0), profile(1.5), profile(0.2 * d(rng)));
}

}  // namespace

TEST(ModelParams, Validation) {
  ModelParams p;
  p.tau = 0.0;
  try {
    p.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.key(), "params.tau");
  }
  p = {};
  p.tau = 1.5;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.mu = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.chi = -2.0;
  EXPECT_NO_THROW(p.validate());
}

TEST(RhsU, ExtinctionIsEquilibrium) {
  std::mt19937_64 rng(1);
  auto g = Grid::rectangle(1.0, 1.0, 5, 6);
  ModelParams p;
  p.chi = 2.0;
  auto out = rhs_u(ModelState(0.0, Field::constant(g, 0.0), random_field(g, rng, 0, 1)),
                   random_coefficients(g, rng), p);
  for (double x : out.values()) EXPECT_EQ(x, 0.0);
}

TEST(RhsU, FlatReducesToOde) {
  std::mt19937_64 rng(2);
  auto g = Grid::line(2.0, 9);
  const double c = 0.7;
  auto coeffs = CoefficientSet::constant(g, 1.3, 0.8, 0.25);
  ModelParams p;
  auto out = rhs_u(ModelState(0.0, Field::constant(g, c), random_field(g, rng, 0, 1)), coeffs, p);
  const double expected = c * (1.3 - 0.8 * c - 0.25 * 2.0 * c);
  for (double x : out.values()) EXPECT_NEAR(x, expected, 1e-15);
}

TEST(RhsU, CarryingCapacity) {
  auto g = Grid::line(1.0, 7);
  auto out = rhs_u(ModelState(0.0, Field::constant(g, 1.0), Field::constant(g, 0.3)),
                   CoefficientSet::constant(g, 1, 1, 0), ModelParams{});
  for (double x : out.values()) EXPECT_EQ(x, 0.0);
}

TEST(RhsU, NoSpontaneousGeneration) {
  std::mt19937_64 rng(4);
  auto g = Grid::line(1.0, 9);
  std::vector<double> u(9, 0.5);
  u[4] = 0.0;
  auto coeffs = random_coefficients(g, rng);
  auto state = ModelState(0.3, Field(g, u), random_field(g, rng, 0, 1));
  // with chi = 0 the only contributions at node 4 are diffusion and reaction
  auto out = rhs_u(state, coeffs, ModelParams{});
  auto lap = laplacian_neumann(state.u);
  EXPECT_EQ(out[4], lap[4]);
}

TEST(RhsU, LinearInChi) {
  std::mt19937_64 rng(6);
  auto g = Grid::rectangle(1.0, 2.0, 6, 9);
  auto coeffs = random_coefficients(g, rng);
  ModelState s(0.2, random_field(g, rng, 0, 2), random_field(g, rng, 0, 2));
  auto at = [&](double chi) {
    ModelParams p;
    p.chi = chi;
    return rhs_u(s, coeffs, p);
  };
  auto lhs = at(0.7) + at(-1.9) - at(0.0);
  auto rhs = at(0.7 - 1.9);
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    EXPECT_NEAR(lhs[k], rhs[k], 1e-12 * (1.0 + std::abs(rhs[k])));
  }
}

TEST(RhsU, GridMismatch) {
  auto a = Grid::line(1.0, 5);
  auto b = Grid::line(1.0, 6);
  EXPECT_THROW(ModelState(0.0, Field::constant(a, 1), Field::constant(b, 1)), StructuralError);
  EXPECT_THROW(rhs_u(ModelState(0.0, Field::constant(a, 1), Field::constant(a, 1)),
                     CoefficientSet::constant(b, 1, 1, 0), ModelParams{}),
               StructuralError);
}

TEST(RhsV, Examples) {
  auto g = Grid::line(1.0, 5);
  ModelParams p;
  p.mu = 2.0;
  p.lambda = 0.5;
  auto eq = rhs_v(ModelState(0.0, Field::constant(g, 0.3), Field::constant(g, 2.0 * 0.3 / 0.5)), p);
  for (double x : eq.values()) EXPECT_NEAR(x, 0.0, 1e-15);

  ModelParams q;
  q.mu = 2.0;
  auto two = rhs_v(ModelState(0.0, Field::constant(g, 1.0), Field::constant(g, 0.0)), q);
  for (double x : two.values()) EXPECT_EQ(x, 2.0);
}

TEST(RhsV, TauScaling) {
  std::mt19937_64 rng(8);
  auto g = Grid::rectangle(1.0, 1.0, 5, 5);
  ModelState s(0.0, random_field(g, rng, 0, 1), random_field(g, rng, 0, 1));
  ModelParams one;
  ModelParams half;
  half.tau = 0.5;
  auto a = rhs_v(s, one);
  auto b = rhs_v(s, half);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(b[k], 2.0 * a[k]);
}

TEST(MassRate, Examples) {
  auto g = Grid::line(1.0, 11);
  ModelParams p;
  p.lambda = 1.5;
  auto coeffs = CoefficientSet::constant(g, 1, 1, 0);
  auto ext = mass_rate(ModelState(0.0, Field::constant(g, 0.0), Field::constant(g, 2.0)), coeffs, p);
  EXPECT_EQ(ext.du, 0.0);
  EXPECT_NEAR(ext.dv, -1.5 * 2.0, 1e-15);

  ModelParams q;
  auto eq = mass_rate(ModelState(0.0, Field::constant(g, 1.0), Field::constant(g, 1.0)), coeffs, q);
  EXPECT_EQ(eq.du, 0.0);
  EXPECT_EQ(eq.dv, 0.0);
}

TEST(MassRate, MatchesIntegratedRhs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (auto g : {Grid::line(1.7, 31), Grid::rectangle(1.0, 1.3, 9, 12)}) {
    for (int trial = 0; trial < 25; ++trial) {
      ModelParams p;
      p.chi = d(rng);
      p.tau = 0.2 + 0.8 * std::abs(d(rng)) / 3.0;
      auto coeffs = random_coefficients(g, rng);
      ModelState s(d(rng), random_field(g, rng, 0, 3), random_field(g, rng, 0, 3));
      auto rate = mass_rate(s, coeffs, p);
      const auto r = rhs_u(s, coeffs, p);
      const double scale = g->volume() * std::max(1.0, norms(r).linf) * 10.0;
      EXPECT_LE(std::abs(integrate(r) - rate.du), 1e-12 * scale);
      const double dv = p.tau * integrate(rhs_v(s, p));
      EXPECT_LE(std::abs(dv - rate.dv), 1e-12 * scale);
    }
  }
}
