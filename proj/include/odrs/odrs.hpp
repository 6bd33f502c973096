#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "odrs/crs.hpp"
#include "odrs/instance.hpp"
#include "odrs/rng.hpp"

namespace odrs {

enum class Variant { matching, b_matching };
enum class Algorithm { warmup, odrs, odrs_b };

Variant parse_variant(const std::string& s);
std::string to_string(Variant v);
Algorithm parse_algorithm(const std::string& s);
std::string to_string(Algorithm a);

double f_eps_delta(double z, double eps, double delta);
double f_prime(double z, double eps, double delta);
// Point where the feasibility conditions are checked.
double z_star(double eps, double delta, Variant v);
// Empty string if feasible, else the violated inequality.
std::string feasibility_violation(double eps, double delta, Variant v);

struct ScalingParams {
  double eps = 0.0;
  double delta = 0.0;
  Variant variant = Variant::matching;
  double theta = 1.0;   // matching threshold, or the b-matching s-hat threshold
  double theta1 = 0.0;  // b-matching only
  double theta2 = 1.0;

  // Throws ParamError on infeasible params when check is set.
  static ScalingParams make(double eps, double delta, Variant v, bool check = true);
  nlohmann::json to_json() const;
  static ScalingParams from_json(const nlohmann::json& j);
};

double ratio_bound(const ScalingParams& p);
// g(y) = 1 - exp(-(1-y)(1+delta)) (1 - y(1-eps)) and its minimizer.
double g_claim(double y, double eps, double delta);
double g_minimizer(double eps, double delta);

struct OptimizedParams {
  double eps = 0.0, delta = 0.0, alpha = 0.0;
};
OptimizedParams optimize_params(Variant v);
// Optimal params as ScalingParams (cached).
const ScalingParams& optimal_params(Variant v);

// Cumulative scaled degree: H(s) with x-hat = H(s + x) - H(s).
double hat_cumulative(double s, const ScalingParams& p);
double scale_hat(double x, double s, const ScalingParams& p);
double scale_hat_b(double x, double s, const ScalingParams& p);

struct Bin {
  std::vector<int> ids;
  double load = 0.0;
};
// First-fit in the given order; ids in each bin keep input order.
std::vector<Bin> first_fit(const std::vector<std::pair<int, double>>& items);

// One node's part of an arrival step.
struct NodeStep {
  int node = 0;
  double x = 0.0;
  double xhat = 0.0;
  double shat = 0.0;       // before the step (snapped)
  double shat_next = 0.0;  // after the step (snapped)
  double cand = 0.0;       // candidate probability inside its bin
  bool crossing = false;   // crosses an integer boundary: singleton bin
  bool low = false;
  // bid[L][c] and next_lag[L][c] for lag bit L and candidate bit c.
  bool bid[2][2] = {};
  bool next_lag[2][2] = {};
};

struct StepBin {
  std::vector<int> members;  // indices into StepPlan::nodes, ascending node id
  double load = 0.0;
  bool low = false;
};

struct StepPlan {
  std::vector<NodeStep> nodes;  // ascending node id; position = CRS element position
  std::vector<StepBin> bins;
  SupportDistribution law;  // exact law of the bidder set
  SelectionRule rule;
  double alpha = 1.0;
};

// Builds per-arrival plans online (each push sees only arrivals so far).
class OdrsPlanner {
 public:
  OdrsPlanner(std::vector<int> capacities, Algorithm alg, ScalingParams params, double gamma = 0.0);
  const StepPlan& push(const Arrival& a);
  const std::vector<StepPlan>& steps() const { return steps_; }
  Algorithm algorithm() const { return alg_; }
  const ScalingParams& params() const { return params_; }

 private:
  std::vector<int> caps_;
  Algorithm alg_;
  ScalingParams params_;
  double gamma_;
  std::vector<double> sum_, comp_;  // compensated raw prefix sums
  std::vector<StepPlan> steps_;
};

std::vector<StepPlan> build_plan(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params,
                                 double gamma = 0.0);

// Exact law of the lag bits (1 = bid count at the floor of s-hat) of `nodes`
// after steps [0, upto). Dense, indexed by local mask.
std::vector<double> lag_law(const std::vector<StepPlan>& steps, int upto, const std::vector<int>& nodes);

// Exact law of the bidder set of step t given the lag law of its nodes.
SupportDistribution bidder_law(const StepPlan& step, const std::vector<double>& lag);

using Matching = std::vector<std::pair<int, int>>;  // (arrival, offline)
nlohmann::json matching_to_json(const Matching& m);

// Per-run state: bid counts and matched counts.
class OdrsSampler {
 public:
  explicit OdrsSampler(std::vector<int> capacities);
  void reset();
  // Returns the matched offline node or -1. Draws one uniform per bin, then
  // one for the CRS.
  int step(const StepPlan& plan, SplitMix64& rng);
  const std::vector<long>& bids() const { return bids_; }
  const std::vector<long>& matched() const { return matched_; }

 private:
  std::vector<int> caps_;
  std::vector<long> bids_, matched_;
};

// Fully online: plans each arrival when it arrives.
class OnlineOdrs {
 public:
  OnlineOdrs(std::vector<int> capacities, Algorithm alg, ScalingParams params, std::uint64_t seed,
             double gamma = 0.0);
  int arrive(const Arrival& a);

 private:
  OdrsPlanner planner_;
  OdrsSampler sampler_;
  SplitMix64 rng_;
};

// Replays a precomputed plan with a fresh seed; out[t] = offline node or -1.
std::vector<int> run_plan(const std::vector<StepPlan>& plan, const std::vector<int>& capacities,
                          std::uint64_t seed);

Matching warmup_round(const MatchingInstance& inst, std::uint64_t seed);
Matching odrs_round(const MatchingInstance& inst, const ScalingParams& params, std::uint64_t seed);
Matching odrs_round_b(const MatchingInstance& inst, const ScalingParams& params, std::uint64_t seed);

MatchingInstance downscale_for_polytime(const MatchingInstance& inst, double gamma);
// ceil(2(1+delta)/gamma) + 1
int polytime_bin_bound(double delta, double gamma);

}  // namespace odrs
