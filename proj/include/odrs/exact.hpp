#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "odrs/bitdist.hpp"
#include "odrs/crs.hpp"
#include "odrs/instance.hpp"
#include "odrs/odrs.hpp"
#include "odrs/rng.hpp"

namespace odrs {

SupportDistribution bid_set_law(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params, int t);

struct EdgeProb {
  int t = 0;
  int i = 0;
  double x = 0.0;
  double prob = 0.0;
  double ratio() const { return prob / x; }
};

std::vector<EdgeProb> edge_match_probs(const std::vector<StepPlan>& plan);
std::vector<EdgeProb> edge_match_probs(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params);
// min over edges of prob / x; 1 when there are no edges.
double min_ratio(const std::vector<EdgeProb>& probs);
double rounding_ratio_exact(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params);

// Law of the bits (bid count - floor(s-hat)) for offline nodes 0..n-1 before
// step t. In the matching case with s-hat < 1 this is "has bid".
BitDistribution state_law(const std::vector<StepPlan>& plan, int t, int n);

// Explicit joint law of n Bernoulli variables with sparse atoms.
class JointBernoulli {
 public:
  JointBernoulli(int n, double declared_p = std::numeric_limits<double>::quiet_NaN());
  static JointBernoulli from_bitdist(const BitDistribution& d);

  void add_atom(const std::vector<int>& ones, double p);
  int size() const { return n_; }
  double declared_p() const { return p_; }
  double marginal(int i) const;
  // E[prod_{i in set} Y_i]
  double expect_all(const std::vector<int>& set) const;
  std::size_t atom_count() const { return probs_.size(); }
  double total() const;
  bool bit(std::size_t atom, int i) const { return words_[atom][i >> 6] >> (i & 63) & 1ULL; }
  double atom_prob(std::size_t atom) const { return probs_[atom]; }

 private:
  int n_;
  double p_;
  std::vector<std::vector<std::uint64_t>> words_;
  std::vector<double> probs_;
};

// m equally likely atoms; each variable is 1 in exactly k random atoms, so
// every marginal equals k/m.
JointBernoulli random_common_marginal_joint(int n, int m, int k, SplitMix64& rng);

struct CovResult {
  int i = -1, j = -1;
  double cov = 0.0;
};
CovResult max_pairwise_cov(const JointBernoulli& joint);

// Sufficient n from the recurrence n_1 = ceil(2p/eps + 1),
// n_r = n_1(p, eps/2^(2^r)) + 2 n_{r-1}(p^2 - eps/2^(2^r), eps/2).
long cylinder_n_bound(double p, double eps, int r);

struct CylinderResult {
  std::vector<int> subset;
  double value = 0.0;   // E[prod Y_i]
  double target = 0.0;  // p^(2^r) - eps
};
CylinderResult find_positive_cylinder(const JointBernoulli& joint, int r, double eps);

enum class CylinderDirection { ones, zeros, both };
struct CylinderReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  std::uint64_t worst = 0;
  bool zeros_side = false;
};
// Scans subsets of size >= 2; n <= 12.
CylinderReport neg_cylinder_check(const BitDistribution& dist, CylinderDirection dir);
CovResult max_pairwise_cov(const BitDistribution& dist);

}  // namespace odrs
