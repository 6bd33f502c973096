#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "odrs/bitdist.hpp"

namespace odrs {

// Snap to the nearest integer when within 1e-9.
double snap(double s);

// Online level-set state: compensated prefix sum and the selected count.
struct LevelSetState {
  double sum = 0.0;
  double comp = 0.0;  // Kahan compensation
  long count = 0;

  double s() const { return snap(sum); }
  LevelSetState advanced(double x) const;  // sum += x, count unchanged
};

// Pr[select] given snapped prefix s_prev, current count and next fraction x.
// Throws InvariantError if the raw value is outside [-1e-9, 1+1e-9].
double selection_probability(double s_prev, long count, double x);

struct StepOutcome {
  bool selected = false;
  double p = 0.0;
  LevelSetState state;
};

// Select iff u < p. Asserts count' in {floor(s'), ceil(s')}.
StepOutcome online_step(const LevelSetState& st, double x, double u);

// Dummy-padded online rounding; returns 0/1 per input entry.
std::vector<int> online_round(const std::vector<double>& x, std::uint64_t seed);

// Pivotal STEP on two fractional values.
std::pair<double, double> step_pair(double a, double b, double u);

std::vector<int> offline_pivotal(const std::vector<double>& x, std::uint64_t seed);

// Select j iff (s_{j-1}, s_j] contains a point of N + tau.
std::vector<int> threshold_round(const std::vector<double>& x, double tau);

BitDistribution exact_dist_online(const std::vector<double>& x);
BitDistribution exact_dist_offline(const std::vector<double>& x);
// Law of threshold_round with tau ~ U[0,1).
BitDistribution exact_dist_threshold(const std::vector<double>& x);

}  // namespace odrs
