#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "chemostab/stability.hpp"

using namespace chemostab;

namespace {

const double pi = std::numbers::pi;

KnownConstants constants(double eta, double m2, double c3) {
  KnownConstants c;
  c.eta = KnownConstant{eta, Provenance::config};
  c.M2 = KnownConstant{m2, Provenance::config};
  c.C3_tilde = KnownConstant{c3, Provenance::config};
  return c;
}

ModelParams params(double chi, double tau, double lambda, double mu) {
  ModelParams p;
  p.chi = chi;
  p.tau = tau;
  p.lambda = lambda;
  p.mu = mu;
  return p;
}

const Clause& clause(const Verdict& v, const std::string& name) {
  for (const auto& c : v.clauses) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("missing clause " + name);
}

double pos(double x) { return x > 0 ? x : 0; }
double neg(double x) { return x < 0 ? -x : 0; }

}  // namespace

TEST(KnownConstants, Validation) {
  auto c = constants(1.0, 0.5, 1.0);
  EXPECT_THROW(c.validate(), ValidationError);
  c = constants(-1.0, 2.0, 1.0);
  EXPECT_THROW(c.validate(), ValidationError);
  c = constants(1.0, 2.0, 1.0);
  c.cq1.push_back({0.5, 1.0});
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_NO_THROW(constants(0.5, 2.0, 1.0).validate());
}

TEST(ConvexM2, RemarkExample) {
  auto g = Grid::line(1.0, 11);
  auto coeffs = CoefficientSet::constant(g, 1, 1, 0);
  auto c = compute_M2_convex(coeffs, params(1, 1, 1, 1), 1);
  // M0 = 1.5 * 1 * 1 / 1, M0ai = 1 + 2 + 0, M2 = 9 / (4 * 0.75)
  EXPECT_NEAR(c.M0, 1.5, 1e-12);
  EXPECT_NEAR(c.M0ai, 3.0, 1e-12);
  EXPECT_NEAR(c.M2, 3.0, 1e-12);
}

TEST(ConvexM2, ZeroChiLimit) {
  auto g = Grid::line(1.0, 11);
  auto c = compute_M2_convex(CoefficientSet::constant(g, 1, 1, 0), params(0, 1, 1, 1), 1);
  EXPECT_NEAR(c.M2, 9.0 / 4.0, 1e-12);
}

TEST(ConvexM2, NegativeNonlocalCoefficient) {
  auto g = Grid::rectangle(2.0, 0.5, 5, 5);
  auto coeffs = CoefficientSet::constant(g, 2.0, 1.5, -0.25);
  auto c = compute_M2_convex(coeffs, params(0.4, 1, 0.5, 1.2), 2);
  const double m0 = 1.5 * 1.0 * 2.0 / (1.5 - 1.0 * 0.25);
  const double m0ai = 2.0 + 1.0 + 0.25 * m0;
  EXPECT_NEAR(c.M0, m0, 1e-12);
  EXPECT_NEAR(c.M0ai, m0ai, 1e-12);
  EXPECT_NEAR(c.M2, m0ai * m0ai / (4.0 * (1.5 - 2 * 1.2 * 0.4 / 4.0)), 1e-12);
}

TEST(ConvexM2, DenominatorZero) {
  auto g = Grid::line(1.0, 11);
  try {
    compute_M2_convex(CoefficientSet::constant(g, 1, 0.25, 0), params(1, 1, 1, 1), 1);
    FAIL();
  } catch (const HypothesisFailure& e) {
    EXPECT_EQ(e.clause(), "a1_inf > n*mu*chi/4");
  }
  try {
    compute_M2_convex(CoefficientSet::constant(g, 1, 1, -2), params(1, 1, 1, 1), 1);
    FAIL();
  } catch (const HypothesisFailure& e) {
    EXPECT_NE(e.clause().find("Omega"), std::string::npos);
  }
}

TEST(H1, ZeroChi) {
  auto g = Grid::line(1.0, 11);
  auto v = check_H1(CoefficientSet::constant(g, 1, 0.3, 0), params(0, 1, 1, 1), {});
  EXPECT_EQ(v.status, Status::holds);
  EXPECT_NEAR(*v.clauses[0].margin, 0.3, 1e-15);
}

TEST(H1, NonnegativeA2) {
  auto g = Grid::line(1.0, 11);
  auto v = check_H1(CoefficientSet::constant(g, 1, 0.7, 2.0), params(0, 1, 1, 1), {});
  EXPECT_NEAR(*v.clauses[1].margin, 0.7, 1e-15);
}

TEST(H1, HandEvaluation) {
  auto g = Grid::line(1.0, 11);
  KnownConstants c;
  c.cq1 = {{1.5, 8.0}};
  auto v = check_H1(CoefficientSet::constant(g, 1, 1, 0), params(0.3, 1, 1, 1), c);
  const double threshold = (0.5 / 1.5) * std::pow(8.0, 1.0 / 2.5) * 0.3;
  EXPECT_NEAR(threshold, 0.2297, 1e-4);
  EXPECT_EQ(v.status, Status::holds);
  EXPECT_NEAR(*v.clauses[0].margin, 1.0 - threshold, 1e-12);
  EXPECT_NEAR(*v.clauses[0].margin, 0.7703, 1e-4);
}

TEST(H1, MinimumOverPairsAndSoundness) {
  auto g = Grid::line(1.0, 11);
  KnownConstants c;
  c.cq1 = {{1.5, 8.0}, {3.0, 1e6}, {0.9, 1e-9}};  // last pair inadmissible
  auto v = check_H1(CoefficientSet::constant(g, 1, 1, 0), params(0.3, 1, 1, 1), c);
  EXPECT_NEAR(*v.clauses[0].margin, 1.0 - (0.5 / 1.5) * std::pow(8.0, 0.4) * 0.3, 1e-12);
  // a bound that does not clear cannot refute the infimum
  c.cq1 = {{2.0, 1e6}};
  auto w = check_H1(CoefficientSet::constant(g, 1, 1, 0), params(0.3, 1, 1, 1), c);
  EXPECT_EQ(w.clauses[0].status, Status::inconclusive);
}

TEST(H1, MissingPairsInconclusive) {
  auto g = Grid::line(1.0, 11);
  auto v = check_H1(CoefficientSet::constant(g, 1, 1, 0), params(0.3, 1, 1, 1), {});
  EXPECT_EQ(v.status, Status::inconclusive);
}

TEST(H2, Examples) {
  auto g = Grid::line(1.0, 11);
  auto coeffs = CoefficientSet::constant(g, 1, 1, 0);
  auto ok = check_H2(coeffs, params(1, 1, 1, 1), 1, true);
  EXPECT_EQ(ok.status, Status::holds);
  EXPECT_NEAR(*clause(ok, "a1_inf > n*mu*chi/4").margin, 0.75, 1e-15);
  EXPECT_EQ(clause(ok, "Omega convex").status, Status::holds);

  auto half = check_H2(coeffs, params(1, 0.5, 1, 1), 1, true);
  EXPECT_EQ(half.status, Status::fails);
  EXPECT_EQ(clause(half, "tau = 1").status, Status::fails);

  auto negative = check_H2(coeffs, params(-0.1, 1, 1, 1), 1, true);
  EXPECT_EQ(clause(negative, "chi > 0").status, Status::fails);
}

TEST(H3, Examples) {
  KnownConstants c;
  c.M2 = KnownConstant{3.0, Provenance::config};
  auto ok = check_H3(params(0.2, 1, 1, 1), c);
  EXPECT_EQ(ok.status, Status::holds);
  EXPECT_NEAR(*ok.clauses[0].margin, 0.4, 1e-15);
  EXPECT_EQ(check_H3(params(0.5, 1, 1, 1), c).status, Status::fails);
  EXPECT_EQ(check_H3(params(0.0, 1.5, 1, 1), c).status, Status::fails);
  EXPECT_EQ(check_H3(params(0.2, 1, 1, 1), {}).status, Status::inconclusive);
}

TEST(L1, Examples) {
  auto unit = Grid::line(1.0, 5);
  EXPECT_DOUBLE_EQ(compute_L1(0.0, CoefficientSet::constant(unit, 1, 1, 0), constants(1, 2, 1)), 2.0);
  EXPECT_DOUBLE_EQ(compute_L1(0.0, CoefficientSet::constant(unit, 1, 1.5, -1), constants(0.7, 2, 1)),
                   2 * 0.7 * 1.5);
  auto two = Grid::line(2.0, 5);
  EXPECT_DOUBLE_EQ(compute_L1(0.0, CoefficientSet::constant(two, 1, 2, 3), constants(0.5, 2, 1)), 8.0);
  EXPECT_THROW(compute_L1(0.0, CoefficientSet::constant(unit, 1, 1, 0), {}), ValidationError);
}

TEST(L1, NondecreasingInEta) {
  auto g = Grid::line(1.0, 5);
  auto coeffs = CoefficientSet::constant(g, 1, 0.8, -0.3);
  double prev = -1.0;
  for (double eta = 0.1; eta < 2.0; eta += 0.1) {
    const double l1 = compute_L1(0.0, coeffs, constants(eta, 3, 1));
    EXPECT_GE(l1, prev);
    prev = l1;
  }
}

TEST(L2, Examples) {
  auto g = Grid::line(1.0, 5);
  EXPECT_DOUBLE_EQ(compute_L2(0.0, CoefficientSet::constant(g, 1, 1, 0), params(0, 1, 1, 1),
                              constants(0.37, 2, 5)),
                   1.5);
  EXPECT_DOUBLE_EQ(compute_L2(0.0, CoefficientSet::constant(g, 2, 1, 0), params(0, 0.5, 2, 3),
                              constants(0.37, 2, 5)),
                   2.0 + 9.0 / (2 * 2 * 0.5));
}

TEST(L2, ConstantCoefficientIdentity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::uniform_real_distribution<double> pos_d(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double length = pos_d(rng);
    auto g = Grid::line(length, 5);
    const double a0 = d(rng), a1 = pos_d(rng), a2 = d(rng);
    const auto p = params(d(rng), std::min(1.0, pos_d(rng)), pos_d(rng), pos_d(rng));
    const double eta = pos_d(rng), m2 = eta + pos_d(rng), c3 = pos_d(rng);
    auto coeffs = CoefficientSet::constant(g, a0, a1, a2);
    const auto c = constants(eta, m2, c3);
    const double diff = compute_L2(0.0, coeffs, p, c) - compute_L1(0.0, coeffs, c);
    const double closed = a0 + p.mu * p.mu / (2 * p.lambda * p.tau) + std::abs(p.chi) / 2 * c3 +
                          length * m2 * (pos(a2) + 2 * neg(a2)) -
                          eta * (2 * a1 + length * (std::abs(a2) + pos(a2)));
    EXPECT_NEAR(diff, closed, 1e-12 * std::max(1.0, std::abs(closed)));
  }
}

TEST(L2, EnergyEstimateRegrouping) {
  // The energy estimate groups the terms of L2 - L1 per coefficient sign.
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto g = Grid::rectangle(1.5, 0.8, 7, 6);
  const double vol = g->volume();
  for (int trial = 0; trial < 50; ++trial) {
    auto sep = [&](double offset) {
      return CoefficientSpec(g, CoefficientSpec::Separable{
                                    TimeFactor::sinusoid(1.0, 0.5 * d(rng), 1.0, d(rng)),
                                    SpatialProfile{SpatialProfile::Cosine{offset, d(rng), {1.0, 2.0}}}});
    };
    CoefficientSet coeffs(sep(1.0), sep(2.5), sep(0.3 * d(rng)));
    const auto p = params(d(rng), 0.5 + 0.5 * std::abs(d(rng)), 1.0 + std::abs(d(rng)), 0.5 + std::abs(d(rng)));
    const double eta = 0.3, m2 = 1.7, c3 = 2.2;
    const auto c = constants(eta, m2, c3);
    const double t = 3.0 * d(rng);
    const Envelope a0 = envelope(coeffs.a0, t), a1 = envelope(coeffs.a1, t), a2 = envelope(coeffs.a2, t);
    const double regrouped =
        a0.sup + p.mu * p.mu / (2 * p.lambda * p.tau) +
        vol * m2 * (neg(a2.inf) + pos(a2.sup) + neg(a2.inf)) -
        eta * (2 * a1.inf + vol * pos(a2.inf)) - vol * eta * (pos(a2.inf) + neg(a2.sup)) +
        std::abs(p.chi) / 2 * c3;
    EXPECT_NEAR(compute_L2(t, coeffs, p, c) - compute_L1(t, coeffs, c), regrouped, 1e-12);
  }
}

TEST(PerturbationK, Formula) {
  auto g = Grid::line(2.0, 5);
  auto coeffs = CoefficientSet::constant(g, 1, 1.5, -0.5);
  // eps (2 a1 + |O| (a2)_-) + eps |O| ((a2)_- + (a2)_-)
  EXPECT_NEAR(perturbation_K(0.0, 0.1, coeffs), 0.1 * (3.0 + 1.0) + 0.1 * 2.0 * 1.0, 1e-15);
  EXPECT_EQ(perturbation_K(0.0, 0.0, coeffs), 0.0);
}

TEST(Theta, ConstantNegative) {
  auto g = Grid::line(1.0, 5);
  // L2 - L1 = 1.2 + 0.5 - 2 = -0.3 and lambda / (2 tau) = 0.5
  auto r = estimate_theta(CoefficientSet::constant(g, 1.2, 1, 0), params(0, 1, 1, 1),
                          constants(1, 2, 1), {0, 10}, 50);
  ASSERT_TRUE(r.theta);
  EXPECT_NEAR(*r.theta, -0.3, 1e-14);
  EXPECT_EQ(r.conclusion, Conclusion::criterion_holds);
  ASSERT_TRUE(r.eps);
  EXPECT_NEAR(*r.eps, 0.03, 1e-14);
  // window independence
  auto other = estimate_theta(CoefficientSet::constant(g, 1.2, 1, 0), params(0, 1, 1, 1),
                              constants(1, 2, 1), {-7, 100}, 3);
  EXPECT_NEAR(*other.theta, *r.theta, 1e-14);
}

TEST(Theta, ConstantPositive) {
  auto g = Grid::line(1.0, 5);
  auto r = estimate_theta(CoefficientSet::constant(g, 1.7, 1, 0), params(0, 1, 1, 1),
                          constants(1, 2, 1), {0, 10}, 50);
  EXPECT_NEAR(*r.theta, 0.2, 1e-14);
  EXPECT_EQ(r.conclusion, Conclusion::criterion_fails);
  EXPECT_FALSE(r.eps);
}

TEST(Theta, ClampedAtDecayFloor) {
  auto g = Grid::line(1.0, 5);
  // L2 - L1 = 0.1 + 0.5 - 4 = -3.4 but the floor is -0.5
  auto r = estimate_theta(CoefficientSet::constant(g, 0.1, 2, 0), params(0, 1, 1, 1),
                          constants(1, 2, 1), {0, 1}, 10);
  EXPECT_NEAR(*r.theta, -0.5, 1e-15);
  for (const auto& s : r.series) EXPECT_GE(s.h, -0.5);
}

TEST(Theta, PeriodicAverage) {
  auto g = Grid::line(1.0, 5);
  // L2 - L1 = (1.4 + sin t) + 100 / 200 - 2 = sin t - 0.1, floor -50
  CoefficientSet coeffs(
      CoefficientSpec(g, CoefficientSpec::Separable{TimeFactor::sinusoid(1.4, 1.0, 1.0, 0.0), {}}),
      CoefficientSpec::constant(g, 1.0), CoefficientSpec::constant(g, 0.0));
  auto r = estimate_theta(coeffs, params(0, 1, 100, 10), constants(1, 2, 1), {0, 2 * pi}, 10000);
  EXPECT_NEAR(*r.theta, -0.1, 1e-3);
  EXPECT_EQ(r.conclusion, Conclusion::criterion_holds);
  auto doubled = estimate_theta(coeffs, params(0, 1, 100, 10), constants(1, 2, 1), {0, 2 * pi}, 20000);
  EXPECT_NEAR(*doubled.theta, *r.theta, 1e-10);
  EXPECT_LE(r.quadrature_error, 1e-10);
}

TEST(Theta, MissingConstantsInconclusive) {
  auto g = Grid::line(1.0, 5);
  KnownConstants c;
  c.eta = KnownConstant{1.0, Provenance::config};
  auto r = estimate_theta(CoefficientSet::constant(g, 1, 1, 0), params(0, 1, 1, 1), c, {0, 1}, 10);
  EXPECT_FALSE(r.theta);
  EXPECT_EQ(r.conclusion, Conclusion::inconclusive);
}

TEST(Theta, Errors) {
  auto g = Grid::line(1.0, 5);
  auto coeffs = CoefficientSet::constant(g, 1, 1, 0);
  EXPECT_THROW(estimate_theta(coeffs, params(0, 1, 1, 1), constants(1, 2, 1), {1, 1}, 10), RangeError);
  EXPECT_THROW(estimate_theta(coeffs, params(0, 1, 1, 1), constants(1, 2, 1), {0, 1}, 1), RangeError);
}

TEST(Report, WritesVerdictAndRows) {
  auto g = Grid::line(1.0, 5);
  auto r = estimate_theta(CoefficientSet::constant(g, 1.2, 1, 0), params(0, 1, 1, 1),
                          constants(1, 2, 1), {0, 1}, 3);
  std::ostringstream os;
  write_report(os, r);
  const std::string text = os.str();
  EXPECT_NE(text.find("# conclusion: criterion_holds"), std::string::npos);
  EXPECT_NE(text.find("# theta: -0.3"), std::string::npos);
  EXPECT_NE(text.find("t,L1,L2,h\n"), std::string::npos);
  EXPECT_NE(text.find("(config)"), std::string::npos);
}
