#include "odrs/bitdist.hpp"

#include <cmath>
#include <set>

#include "odrs/common.hpp"

namespace odrs {

double BitDistribution::prob(std::uint64_t mask) const {
  auto it = probs_.find(mask);
  return it == probs_.end() ? 0.0 : it->second;
}

double BitDistribution::total() const {
  double s = 0.0;
  for (const auto& [m, p] : probs_) s += p;
  return s;
}

std::vector<double> BitDistribution::marginals() const {
  std::vector<double> out(n_, 0.0);
  for (const auto& [m, p] : probs_)
    for (int i = 0; i < n_; ++i)
      if (m >> i & 1ULL) out[i] += p;
  return out;
}

BitDistribution BitDistribution::truncate(int m) const {
  BitDistribution out(m);
  const std::uint64_t keep = m >= 64 ? ~0ULL : ((1ULL << m) - 1);
  for (const auto& [mask, p] : probs_) out.add(mask & keep, p);
  return out;
}

void BitDistribution::prune(double eps) {
  double kept = 0.0;
  for (auto it = probs_.begin(); it != probs_.end();) {
    if (it->second < eps) {
      it = probs_.erase(it);
    } else {
      kept += it->second;
      ++it;
    }
  }
  if (kept > 0)
    for (auto& [m, p] : probs_) p /= kept;
}

std::vector<double> BitDistribution::dense() const {
  if (n_ > 24) throw SizeError("dense(): n > 24");
  std::vector<double> out(std::size_t{1} << n_, 0.0);
  for (const auto& [m, p] : probs_) out[m] += p;
  return out;
}

std::string BitDistribution::mask_string(std::uint64_t mask, int n) {
  std::string s(n, '0');
  for (int i = 0; i < n; ++i)
    if (mask >> i & 1ULL) s[i] = '1';
  return s;
}

nlohmann::json BitDistribution::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [m, p] : probs_) j[mask_string(m, n_)] = p;
  return j;
}

double total_variation(const BitDistribution& a, const BitDistribution& b) {
  std::set<std::uint64_t> keys;
  for (const auto& [m, p] : a.probs()) keys.insert(m);
  for (const auto& [m, p] : b.probs()) keys.insert(m);
  double tv = 0.0;
  for (auto m : keys) tv += std::fabs(a.prob(m) - b.prob(m));
  return 0.5 * tv;
}

}  // namespace odrs
