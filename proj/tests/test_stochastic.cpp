#include <gtest/gtest.h>

#include "odrs/stochastic.hpp"

using namespace odrs;

namespace {

MatchingInstance one(double p, double w) {
  MatchingInstance s;
  s.n_offline = 1;
  s.capacities = {1};
  s.arrivals.push_back({{{0, p, w}}, p});
  return s;
}

}  // namespace

TEST(Lp, OneByOne) {
  auto lp = build_lp(one(0.5, 1.0));
  EXPECT_EQ(lp.A.size(), 3u);
  auto sol = solve_lp(lp);
  EXPECT_NEAR(sol.value, 0.5, 1e-12);
  EXPECT_NEAR(sol.x[0], 0.5, 1e-12);
}

TEST(Lp, TwoSequentialArrivals) {
  MatchingInstance s;
  s.n_offline = 1;
  s.capacities = {1};
  s.arrivals.push_back({{{0, 1.0, 1.0}}, 1.0});
  s.arrivals.push_back({{{0, 1.0, 1.0}}, 1.0});
  auto sol = solve_lp(build_lp(s));
  EXPECT_NEAR(sol.value, 1.0, 1e-12);
  EXPECT_NEAR(sol.x[0] + sol.x[1], 1.0, 1e-12);
}

TEST(Lp, ZeroWeights) { EXPECT_NEAR(solve_lp(build_lp(one(0.7, 0.0))).value, 0.0, 1e-15); }

TEST(Simplex, SmallKnownLp) {
  // max 3a + 2b, a + b <= 4, a + 3b <= 6, a <= 3 -> a = 3, b = 1, value 11
  double v = 0;
  auto x = simplex_max({{1, 1}, {1, 3}, {1, 0}}, {4, 6, 3}, {3, 2}, &v);
  EXPECT_NEAR(v, 11, 1e-12);
  EXPECT_NEAR(x[0], 3, 1e-12);
  EXPECT_NEAR(x[1], 1, 1e-12);
}

TEST(Stochastic, CertainSingleEdge) {
  auto s = one(1.0, 1.0);
  auto x = apply_solution(s, solve_lp(build_lp(s)));
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(stochastic_round(x, optimal_params(Variant::matching), seed).match[0], 0);
}

TEST(Stochastic, HalfArrivalExact) {
  auto s = one(0.5, 1.0);
  const auto& P = optimal_params(Variant::matching);
  auto x = apply_solution(s, solve_lp(build_lp(s)));
  auto plan = build_stochastic_plan(x, P);
  auto ex = stochastic_exact(plan, 1);
  EXPECT_NEAR(ex.match_prob[0][0], plan[0].nodes[0].xhat, 1e-12);
  EXPECT_GE(ex.expected_weight, 0.652 * 0.5);
}

TEST(Stochastic, HeaviestBidderWins) {
  MatchingInstance s;
  s.n_offline = 2;
  s.capacities = {1, 1};
  s.arrivals.push_back({{{0, 0.5, 1.0}, {1, 0.5, 3.0}}, 1.0});
  auto plan = build_stochastic_plan(s, ScalingParams::make(0, 0, Variant::matching));
  ASSERT_EQ(plan[0].priority.front(), 1);
}

TEST(Stochastic, ExactChecksOnRandom) {
  const auto& P = optimal_params(Variant::matching);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = gen_random_stochastic(6, 6, 0.6, seed);
    auto x = apply_solution(s, solve_lp(build_lp(s)));
    auto plan = build_stochastic_plan(x, P);
    auto ex = stochastic_exact(plan, s.n_offline);
    auto c = stochastic_checks(plan, ex, s.n_offline);
    EXPECT_GE(c.worst_threshold, -1e-9);
    EXPECT_LE(c.worst_submult, 1e-9);
    EXPECT_LE(c.worst_free_floor, 1e-12);
    EXPECT_LE(c.worst_bid_bound, 1e-9);
  }
}

TEST(Stochastic, EvalDeterministicInstance) {
  auto ev = eval_vs_lp(one(1.0, 2.0), optimal_params(Variant::matching), 2000, 1);
  EXPECT_DOUBLE_EQ(ev.ratio, 1.0);
  auto z = eval_vs_lp(one(0.5, 0.0), optimal_params(Variant::matching), 2000, 1);
  EXPECT_DOUBLE_EQ(z.ratio, 1.0);
}

TEST(Stochastic, EvalRandomAboveGuarantee) {
  auto ev = eval_vs_lp(gen_random_stochastic(6, 6, 0.5, 9), optimal_params(Variant::matching), 100000, 4);
  EXPECT_GE(ev.ratio, 0.652 - 3 * ev.ratio_ci);
  EXPECT_LE(ev.ratio, 1 + 4 * ev.ratio_ci);
  auto again = eval_vs_lp(gen_random_stochastic(6, 6, 0.5, 9), optimal_params(Variant::matching), 100000, 4);
  EXPECT_EQ(ev.mean, again.mean);
}
