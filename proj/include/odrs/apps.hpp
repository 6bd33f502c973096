#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odrs/instance.hpp"
#include "odrs/odrs.hpp"
#include "odrs/rng.hpp"

namespace odrs {

// Fractional matching x_e = kappa(e) / delta_norm on the multigraph.
MatchingInstance fair_instance(const MultigraphInstance& mg, int delta_norm = 0);

struct ColoredCopy {
  int left = 0;
  int edge = 0;  // index into mg.arrivals[left]
  int copy = 0;
};

// alpha-fair matching sampler: ODRS on kappa/Delta plus a uniform parallel copy.
class FairMatcher {
 public:
  FairMatcher(const MultigraphInstance& mg, Algorithm alg, const ScalingParams& params);
  std::vector<ColoredCopy> sample(std::uint64_t seed) const;
  double alpha() const { return alpha_; }  // 1 / ratio guarantee
  const std::vector<StepPlan>& plan() const { return plan_; }

 private:
  const MultigraphInstance* mg_;
  MatchingInstance inst_;
  std::vector<StepPlan> plan_;
  double alpha_;
};

struct EdgeColoring {
  // colors[u][e][c]: color of copy c of the e-th edge of left node u (-1 = none)
  std::vector<std::vector<std::vector<int>>> colors;
  int colors_used = 0;     // distinct colors
  int matcher_colors = 0;  // palette reserved for fair matchers
  int greedy_colors = 0;   // distinct colors added by the greedy finish
};

// Default C = max(8, ceil(log2(n)^2)).
int default_color_block(int n);

EdgeColoring edge_color_online(const MultigraphInstance& mg, int C, Algorithm alg, const ScalingParams& params,
                               std::uint64_t seed);
// Greedy (first available color) only.
EdgeColoring greedy_color(const MultigraphInstance& mg);

struct ColoringReport {
  bool ok = true;
  std::vector<std::string> violations;
  int colors_used = 0;
  double colors_per_delta = 0.0;
};
ColoringReport verify_coloring(const MultigraphInstance& mg, const EdgeColoring& col);
std::string coloring_csv(const MultigraphInstance& mg, const EdgeColoring& col);

struct CoverSolution {
  std::vector<std::vector<long>> y;  // [vertex][stage]
  double cost = 0.0;
};

// max over edges of (|e| + t_e - 1) / t_e
double cover_alpha(const CoverInstance& cov);
// Per-vertex online level-set rounding of alpha x*, stage by stage.
CoverSolution round_multistage_cover(const CoverInstance& cov, std::uint64_t seed);

struct CoverReport {
  bool ok = true;
  std::vector<std::string> violations;
  double cost = 0.0;
  double lp_cost = 0.0;
  double ratio = 0.0;
};
CoverReport verify_cover(const CoverInstance& cov, const CoverSolution& sol);
double lp_cost(const CoverInstance& cov);
nlohmann::json to_json(const CoverSolution& sol);

}  // namespace odrs
