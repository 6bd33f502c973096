#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace odrs {

// Explicit distribution over bit vectors of length n (bit i of the key is X_i).
class BitDistribution {
 public:
  BitDistribution() = default;
  explicit BitDistribution(int n) : n_(n) {}

  int size() const { return n_; }
  void add(std::uint64_t mask, double p) { probs_[mask] += p; }
  double prob(std::uint64_t mask) const;
  const std::map<std::uint64_t, double>& probs() const { return probs_; }

  double total() const;
  std::vector<double> marginals() const;
  // Law of the first m bits.
  BitDistribution truncate(int m) const;
  // Drop masks with probability below eps and renormalize.
  void prune(double eps = 1e-15);

  // Dense vector indexed by mask; requires n <= 24.
  std::vector<double> dense() const;

  // {"0110": p, ...}; character i is bit i.
  nlohmann::json to_json() const;
  static std::string mask_string(std::uint64_t mask, int n);

 private:
  int n_ = 0;
  std::map<std::uint64_t, double> probs_;
};

double total_variation(const BitDistribution& a, const BitDistribution& b);

}  // namespace odrs
