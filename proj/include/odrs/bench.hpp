#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "odrs/exact.hpp"
#include "odrs/instance.hpp"
#include "odrs/odrs.hpp"

namespace odrs {

// Replays one full run for a seed; out[t] = offline node or -1.
using PlanRunner = std::function<std::vector<int>(std::uint64_t seed)>;

struct Rounder {
  std::string name;
  std::function<PlanRunner(const MatchingInstance&)> prepare;
  // Optional exact edge law; empty when unavailable.
  std::function<std::vector<EdgeProb>(const MatchingInstance&)> exact;
};

Rounder odrs_rounder(Algorithm alg, const ScalingParams& params);
Rounder never_match_rounder();

struct EdgeEstimate {
  int t = 0, i = 0;
  double x = 0.0;
  double prob = 0.0;
  double se = 0.0;  // standard error; zero for exact entries
  bool exact = false;
  double ratio() const { return prob / x; }
};

struct RoundReport {
  std::string algorithm;
  std::uint64_t seed = 0;
  long runs = 0;
  nlohmann::json params;
  std::vector<EdgeEstimate> edges;
  double min_ratio = 0.0;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Normal-approximation 95% interval half-width for a Bernoulli frequency.
double bernoulli_se(double p, long n);
constexpr double kZ95 = 1.959963984540054;

RoundReport monte_carlo_edge_probs(const Rounder& r, const MatchingInstance& inst, long runs, std::uint64_t seed);
RoundReport exact_edge_probs(const Rounder& r, const MatchingInstance& inst);

struct AdversaryReport {
  int n = 0;
  int t1 = -1, t2 = -1;  // probed arrivals
  int i = -1, j = -1;    // chosen offline nodes
  double probe_cov = 0.0;
  double probe_joint = 0.0;
  long n_probe = 0, n_eval = 0;
  double ratio_i = 0.0, ratio_j = 0.0;
  double se_i = 0.0, se_j = 0.0;  // standard errors of the ratios
  double worst_ratio = 0.0, worst_se = 0.0;
  double exact_worst = -1.0;  // exact engine value when available
  nlohmann::json to_json() const;
};

AdversaryReport lb_adversary(const Rounder& r, int n, long n_probe, long n_eval, std::uint64_t seed);

// Upper bound on the final edge ratio any ODRS can reach on the prefix.
double lb_bound(int n);
// 2 sqrt(2) - 2, root of 1 - y - y^2 / 4.
double lb_root();

struct ThreeNodeReport {
  std::vector<std::pair<int, int>> choices;
  std::vector<double> exact;  // Pr[final matched] per choice, -1 if unavailable
  std::vector<double> mc;
  std::vector<double> mc_se;
  double min_exact = -1.0;
  double min_mc = 1.0;
  nlohmann::json to_json() const;
};

MatchingInstance three_node_instance(int i, int j);
ThreeNodeReport three_node_impossibility(const Rounder& r, long runs, std::uint64_t seed);

}  // namespace odrs
