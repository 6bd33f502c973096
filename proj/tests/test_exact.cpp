#include <gtest/gtest.h>

#include <cmath>

#include "odrs/common.hpp"
#include "odrs/exact.hpp"
#include "odrs/level_set.hpp"

using namespace odrs;

TEST(BidSetLaw, SingleBinFreshNodes) {
  MatchingInstance inst;
  inst.n_offline = 2;
  inst.capacities = {1, 1};
  inst.arrivals.push_back({{{0, 0.3, 1}, {1, 0.5, 1}}, 1.0});
  auto law = bid_set_law(inst, Algorithm::odrs, ScalingParams::make(0, 0, Variant::matching), 0);
  EXPECT_NEAR(law.hit_probability(0b11), 0.8, 1e-15);
  double empty = 0, both = 0;
  for (const auto& [m, p] : law.atoms) {
    if (m == 0) empty += p;
    if (m == 0b11) both += p;
  }
  EXPECT_NEAR(empty, 0.2, 1e-15);
  EXPECT_EQ(both, 0.0);
}

TEST(BidSetLaw, WarmupIsProduct) {
  auto law = bid_set_law(gen_uniform_star(3), Algorithm::warmup, {}, 0);
  const double q = 1.0 / 3;
  for (const auto& [m, p] : law.atoms) {
    double prod = 1;
    for (int k = 0; k < 3; ++k) prod *= (m >> k & 1) ? q : 1 - q;
    EXPECT_NEAR(p, prod, 1e-12);
  }
}

TEST(EdgeProbs, SingleEdge) {
  MatchingInstance inst;
  inst.n_offline = 1;
  inst.capacities = {1};
  inst.arrivals.push_back({{{0, 1.0, 1}}, 1.0});
  EXPECT_NEAR(edge_match_probs(inst, Algorithm::warmup, {})[0].prob, 1.0, 1e-14);
  EXPECT_NEAR(rounding_ratio_exact(inst, Algorithm::odrs, optimal_params(Variant::matching)), 1.0, 1e-12);
}

TEST(EdgeProbs, WarmupStarClosedForm) {
  for (const auto& p : edge_match_probs(gen_uniform_star(10), Algorithm::warmup, {}))
    EXPECT_NEAR(p.prob, (1 - std::pow(0.9, 10)) / 10, 1e-10);
}

TEST(EdgeProbs, OdrsRatioAtLeastBound) {
  const auto& P = optimal_params(Variant::matching);
  const double bound = ratio_bound(P);
  for (std::uint64_t s = 0; s < 15; ++s)
    EXPECT_GE(rounding_ratio_exact(gen_random(6, 6, 0.6, s), Algorithm::odrs, P), bound - 1e-9);
}

// Bits are bid count minus floor(s-hat), so Pr[bit] = frac(s-hat).
TEST(StateLaw, QtIdentityForOdrs) {
  const auto& P = optimal_params(Variant::matching);
  auto inst = gen_random(5, 6, 0.7, 3);
  auto plan = build_plan(inst, Algorithm::odrs, P);
  std::vector<double> sh(inst.n_offline, 0.0);
  for (int t = 0; t <= inst.n_arrivals(); ++t) {
    auto m = state_law(plan, t, inst.n_offline).marginals();
    for (int i = 0; i < inst.n_offline; ++i) EXPECT_NEAR(m[i], sh[i] - std::floor(sh[i]), 1e-12);
    if (t < inst.n_arrivals())
      for (const auto& nd : plan[t].nodes) sh[nd.node] = nd.shat_next;
  }
}

TEST(JointBernoulli, CommonMarginals) {
  SplitMix64 rng(1);
  auto j = random_common_marginal_joint(9, 10, 4, rng);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(j.marginal(i), 0.4, 1e-15);
  EXPECT_NEAR(j.total(), 1.0, 1e-15);
}

TEST(MaxPairwiseCov, HandCases) {
  JointBernoulli one_hot(3, 1.0 / 3);
  for (int k = 0; k < 3; ++k) one_hot.add_atom({k}, 1.0 / 3);
  auto c = max_pairwise_cov(one_hot);
  EXPECT_NEAR(c.cov, -1.0 / 9, 1e-15);
  JointBernoulli anti(2, 0.5);
  anti.add_atom({0}, 0.5);
  anti.add_atom({1}, 0.5);
  EXPECT_NEAR(max_pairwise_cov(anti).cov, -0.25, 1e-15);
  BitDistribution ind(3);
  for (std::uint64_t m = 0; m < 8; ++m) ind.add(m, 0.125);
  EXPECT_NEAR(max_pairwise_cov(ind).cov, 0.0, 1e-15);
}

TEST(Cylinder, Bounds) {
  EXPECT_EQ(cylinder_n_bound(0.5, 0.1, 1), 11);
  EXPECT_EQ(cylinder_n_bound(0.5, 0.3, 2), 4);  // trivial: p^4 <= eps
  EXPECT_GT(cylinder_n_bound(0.8, 0.3, 2), 4);
}

TEST(Cylinder, IndependentVariables) {
  JointBernoulli j(4, 0.5);
  for (std::uint64_t m = 0; m < 16; ++m) {
    std::vector<int> ones;
    for (int k = 0; k < 4; ++k)
      if (m >> k & 1) ones.push_back(k);
    j.add_atom(ones, 1.0 / 16);
  }
  // p^4 = 0.0625 <= eps, so n = 4 is enough
  auto r = find_positive_cylinder(j, 2, 0.07);
  EXPECT_EQ(r.subset.size(), 4u);
  EXPECT_NEAR(r.value, 0.0625, 1e-15);
}

TEST(Cylinder, RandomJointsAtBound) {
  SplitMix64 rng(2);
  const long n = cylinder_n_bound(0.5, 0.1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    auto j = random_common_marginal_joint(static_cast<int>(n), 20, 10, rng);
    auto r = find_positive_cylinder(j, 1, 0.1);
    EXPECT_GE(r.value, r.target - 1e-12);
  }
}

TEST(NegCylinder, LevelSetHolds) {
  auto rep = neg_cylinder_check(exact_dist_online({0.3, 0.3, 0.4}), CylinderDirection::both);
  EXPECT_LE(rep.max_violation, 1e-12);
}

TEST(NegCylinder, ThresholdFails) {
  auto rep = neg_cylinder_check(exact_dist_threshold({0.5, 0.5, 0.5, 0.5}), CylinderDirection::ones);
  EXPECT_NEAR(rep.max_violation, 0.25, 1e-12);
  EXPECT_EQ(rep.worst & 0b101, 0b101u);
}

TEST(NegCylinder, ProductLawIsTight) {
  BitDistribution d(3);
  const double q[3] = {0.2, 0.5, 0.7};
  for (std::uint64_t m = 0; m < 8; ++m) {
    double p = 1;
    for (int k = 0; k < 3; ++k) p *= (m >> k & 1) ? q[k] : 1 - q[k];
    d.add(m, p);
  }
  EXPECT_NEAR(neg_cylinder_check(d, CylinderDirection::both).max_violation, 0.0, 1e-15);
}
