#include <gtest/gtest.h>

#include <cmath>

#include "odrs/apps.hpp"
#include "odrs/common.hpp"
#include "odrs/exact.hpp"

using namespace odrs;

namespace {

MultigraphInstance single_pair(int delta) {
  MultigraphInstance mg;
  mg.left = mg.right = 1;
  mg.delta = delta;
  mg.arrivals = {{{0, delta}}};
  return mg;
}

}  // namespace

TEST(FairMatcher, FullPairAlwaysMatched) {
  auto mg = single_pair(4);
  FairMatcher fm(mg, Algorithm::odrs, optimal_params(Variant::matching));
  std::vector<int> copies(4, 0);
  const int N = 8000;
  for (int s = 0; s < N; ++s) {
    auto m = fm.sample(s);
    ASSERT_EQ(m.size(), 1u);
    ++copies[m[0].copy];
  }
  for (int c : copies) EXPECT_NEAR(c / static_cast<double>(N), 0.25, 0.02);
}

TEST(FairMatcher, RegularSimpleGraphIsUniform) {
  auto mg = gen_regular_multigraph(6, 3, 3, 2);
  auto inst = fair_instance(mg);
  for (const auto& a : inst.arrivals) {
    double row = 0;
    for (const auto& e : a.edges) row += e.x;
    EXPECT_NEAR(row, 1.0, 1e-12);
  }
}

TEST(FairMatcher, ExactCopyProbability) {
  auto mg = gen_regular_multigraph(6, 8, 3, 5);
  const auto& P = optimal_params(Variant::matching);
  FairMatcher fm(mg, Algorithm::odrs, P);
  // per copy: Pr[edge] / kappa >= 0.652 / Delta
  for (const auto& p : edge_match_probs(fm.plan())) EXPECT_GE(p.prob / (p.x * mg.delta), 0.652 / mg.delta - 1e-12);
}

TEST(FairMatcher, RejectsDegreeViolation) {
  auto mg = single_pair(4);
  mg.delta = 3;
  EXPECT_THROW(fair_instance(mg), ValidationError);
}

TEST(EdgeColoring, MatchingNeedsOneColor) {
  auto mg = gen_regular_multigraph(5, 1, 1, 3);
  auto col = edge_color_online(mg, 8, Algorithm::odrs, optimal_params(Variant::matching), 1);
  auto rep = verify_coloring(mg, col);
  EXPECT_TRUE(rep.ok);
  EXPECT_EQ(rep.colors_used, 1);
}

TEST(EdgeColoring, ProperOnModerateInstance) {
  auto mg = gen_regular_multigraph(12, 64, 6, 7);
  auto col = edge_color_online(mg, 16, Algorithm::odrs, optimal_params(Variant::matching), 3);
  auto rep = verify_coloring(mg, col);
  EXPECT_TRUE(rep.ok);
  EXPECT_LE(rep.colors_used, 2 * mg.delta - 1);
}

TEST(EdgeColoring, GreedyBaseline) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto mg = gen_regular_multigraph(10, 40, 5, s);
    auto rep = verify_coloring(mg, greedy_color(mg));
    EXPECT_TRUE(rep.ok);
    EXPECT_LE(rep.colors_used, 2 * mg.delta - 1);
  }
}

TEST(EdgeColoring, VerifierNamesViolations) {
  auto mg = gen_regular_multigraph(3, 2, 2, 1);
  auto col = greedy_color(mg);
  auto bad = col;
  bad.colors[0][0][0] = -1;
  auto r1 = verify_coloring(mg, bad);
  EXPECT_FALSE(r1.ok);
  EXPECT_NE(r1.violations.front().find("uncolored"), std::string::npos);
  bad = col;
  // give both edges at left node 0 the same color
  int other_e = 0, other_c = 0;
  if (mg.arrivals[0][0].kappa > 1) {
    other_c = 1;
  } else {
    other_e = 1;
  }
  bad.colors[0][other_e][other_c] = bad.colors[0][0][0];
  auto r2 = verify_coloring(mg, bad);
  EXPECT_FALSE(r2.ok);
  EXPECT_NE(r2.violations.front().find("repeats color"), std::string::npos);
}

TEST(EdgeColoring, CsvHeader) {
  auto mg = single_pair(2);
  auto csv = coloring_csv(mg, greedy_color(mg));
  EXPECT_EQ(csv, "edge,copy,color\n0-0,0,0\n0-0,1,1\n");
}

TEST(EdgeColoring, DefaultBlock) {
  EXPECT_EQ(default_color_block(4), 8);
  EXPECT_EQ(default_color_block(100), 45);
}

TEST(Cover, Alpha) {
  CoverInstance c;
  c.k = 1;
  c.n_vertices = 3;
  c.costs = {{1, 1, 1}};
  c.xstar = {{0.5}, {0.5}, {1.0}};
  c.edges = {{{0, 1}, 1}};
  EXPECT_DOUBLE_EQ(cover_alpha(c), 2.0);
  c.edges = {{{0, 1, 2}, 3}};
  c.xstar = {{1.0}, {1.0}, {1.0}};
  EXPECT_NEAR(cover_alpha(c), 5.0 / 3, 1e-15);
}

TEST(Cover, AlwaysCovers) {
  auto cov = gen_random_cover(15, 25, 3, 2, 3, 1);
  for (std::uint64_t s = 0; s < 2000; ++s) {
    auto rep = verify_cover(cov, round_multistage_cover(cov, s));
    ASSERT_TRUE(rep.ok) << rep.violations.front();
  }
}

TEST(Cover, IntegralInput) {
  CoverInstance c;
  c.k = 2;
  c.n_vertices = 2;
  c.costs = {{1, 2}, {3, 4}};
  c.xstar = {{1, 0}, {0, 1}};
  c.edges = {{{0, 1}, 1}};
  double tot = 0;
  const int N = 20000;
  for (int s = 0; s < N; ++s) tot += verify_cover(c, round_multistage_cover(c, s)).ratio;
  EXPECT_NEAR(tot / N, 2.0, 1e-12);
}

TEST(Cover, VerifierNamesShortEdge) {
  auto cov = gen_random_cover(6, 5, 3, 2, 2, 3);
  CoverSolution zero;
  zero.y.assign(cov.n_vertices, std::vector<long>(cov.k, 0));
  auto rep = verify_cover(cov, zero);
  EXPECT_FALSE(rep.ok);
  EXPECT_NE(rep.violations.front().find("edge 0"), std::string::npos);
}
