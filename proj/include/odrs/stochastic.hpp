#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "odrs/crs.hpp"
#include "odrs/instance.hpp"
#include "odrs/odrs.hpp"

namespace odrs {

// maximize c.x  s.t.  A x <= b, x >= 0 (b >= 0).
struct StochasticLP {
  std::vector<std::pair<int, int>> vars;  // (offline i, arrival t)
  std::vector<double> c;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  int n_offline = 0, n_arrivals = 0;
};

struct LPSolution {
  std::vector<std::pair<int, int>> vars;
  std::vector<double> x;
  double value = 0.0;
  nlohmann::json to_json() const;
};

StochasticLP build_lp(const MatchingInstance& sinst);
LPSolution solve_lp(const StochasticLP& lp);
// Dense primal simplex with Bland's rule; returns x and sets *value.
std::vector<double> simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                                const std::vector<double>& c, double* value);

// Instance with fractions replaced by the LP solution (zero entries dropped).
MatchingInstance apply_solution(const MatchingInstance& sinst, const LPSolution& sol);

struct StochNode {
  int node = 0;
  double x = 0.0, w = 0.0;
  double s = 0.0, shat = 0.0, xhat = 0.0;
  double size = 0.0;  // bid probability x-hat / (p (1 - s-hat))
  bool low = false;
};

struct StochStep {
  double p = 1.0;
  std::vector<StochNode> nodes;          // ascending id
  std::vector<std::vector<int>> bins;    // indices into nodes
  std::vector<int> priority;             // node indices by weight desc, id asc
};

std::vector<StochStep> build_stochastic_plan(const MatchingInstance& xinst, const ScalingParams& params);

struct StochRun {
  std::vector<int> match;  // per arrival: offline node or -1
  double weight = 0.0;
};

StochRun run_stochastic(const std::vector<StochStep>& plan, int n_offline, std::uint64_t seed);
// xinst: the stochastic instance with x* as fractions.
StochRun stochastic_round(const MatchingInstance& xinst, const ScalingParams& params, std::uint64_t seed);

// Exact matched-mask analysis (n <= 16).
struct StochExact {
  std::vector<std::vector<double>> matched_before;  // [t] dense law of matched mask before t
  std::vector<std::vector<double>> bidder_law;      // [t] dense law of P_t over local positions
  std::vector<std::vector<double>> match_prob;      // [t][k] Pr[node k of step t matched at t]
  std::vector<double> shat_before;                  // flattened [t*n + i]
  double expected_weight = 0.0;
};
StochExact stochastic_exact(const std::vector<StochStep>& plan, int n_offline);

struct StochCheck {
  double worst_threshold = 0.0;   // min over (t,z) of Pr[w >= z] - 0.652 * sum x
  double worst_submult = 0.0;     // max Pr[E_S] - prod s-hat
  double worst_free_floor = 0.0;  // max (1 - s-hat) - Pr[free]
  double worst_bid_bound = 0.0;   // max bound - Pr[S ∩ P_t != ∅]
};
StochCheck stochastic_checks(const std::vector<StochStep>& plan, const StochExact& ex, int n_offline,
                             double alpha = 0.652);

struct StochEval {
  double lp_value = 0.0;
  double mean = 0.0;
  double ci = 0.0;  // 95% half-width
  double ratio = 1.0;
  double ratio_ci = 0.0;
  long runs = 0;
  bool exact_checked = false;
  StochCheck exact;
};
StochEval eval_vs_lp(const MatchingInstance& sinst, const ScalingParams& params, long runs, std::uint64_t seed);

}  // namespace odrs
