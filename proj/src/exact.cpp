#include "odrs/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "odrs/common.hpp"

namespace odrs {

SupportDistribution bid_set_law(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params, int t) {
  if (t < 0 || t >= inst.n_arrivals()) throw ParamError("bid_set_law: t out of range");
  OdrsPlanner planner(inst.capacities, alg, params);
  for (int k = 0; k < t; ++k) planner.push(inst.arrivals[k]);
  return planner.push(inst.arrivals[t]).law;
}

std::vector<EdgeProb> edge_match_probs(const std::vector<StepPlan>& plan) {
  std::vector<EdgeProb> out;
  for (int t = 0; t < static_cast<int>(plan.size()); ++t) {
    const auto& st = plan[t];
    if (st.nodes.empty()) continue;
    const auto marg = selection_marginals(st.rule);
    for (std::size_t k = 0; k < st.nodes.size(); ++k) out.push_back({t, st.nodes[k].node, st.nodes[k].x, marg[k]});
  }
  return out;
}

std::vector<EdgeProb> edge_match_probs(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params) {
  // Edges excluded from bucketing (x-hat = 0) never match.
  auto plan = build_plan(inst, alg, params);
  auto probs = edge_match_probs(plan);
  for (int t = 0; t < inst.n_arrivals(); ++t)
    for (const auto& e : inst.arrivals[t].edges) {
      if (e.x <= 0) continue;
      bool found = std::any_of(probs.begin(), probs.end(), [&](const EdgeProb& p) { return p.t == t && p.i == e.i; });
      if (!found) probs.push_back({t, e.i, e.x, 0.0});
    }
  std::sort(probs.begin(), probs.end(), [](const EdgeProb& a, const EdgeProb& b) {
    return a.t != b.t ? a.t < b.t : a.i < b.i;
  });
  return probs;
}

double min_ratio(const std::vector<EdgeProb>& probs) {
  double r = 1.0;
  for (const auto& e : probs)
    if (e.x > 0) r = std::min(r, e.ratio());
  return r;
}

double rounding_ratio_exact(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params) {
  return min_ratio(edge_match_probs(inst, alg, params));
}

BitDistribution state_law(const std::vector<StepPlan>& plan, int t, int n) {
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0);
  const auto lag = lag_law(plan, t, nodes);
  BitDistribution out(n);
  const std::uint64_t full = (n >= 64) ? ~0ULL : ((1ULL << n) - 1);
  for (std::size_t m = 0; m < lag.size(); ++m)
    if (lag[m] > 0) out.add(full & ~static_cast<std::uint64_t>(m), lag[m]);
  return out;
}

// ---- joint Bernoulli ----

JointBernoulli::JointBernoulli(int n, double declared_p) : n_(n), p_(declared_p) {}

JointBernoulli JointBernoulli::from_bitdist(const BitDistribution& d) {
  JointBernoulli j(d.size());
  for (const auto& [m, p] : d.probs()) {
    std::vector<int> ones;
    for (int i = 0; i < d.size(); ++i)
      if (m >> i & 1ULL) ones.push_back(i);
    j.add_atom(ones, p);
  }
  return j;
}

void JointBernoulli::add_atom(const std::vector<int>& ones, double p) {
  std::vector<std::uint64_t> w((n_ + 63) / 64, 0);
  for (int i : ones) {
    if (i < 0 || i >= n_) throw ParamError("JointBernoulli: index out of range");
    w[i >> 6] |= 1ULL << (i & 63);
  }
  words_.push_back(std::move(w));
  probs_.push_back(p);
}

double JointBernoulli::marginal(int i) const {
  double s = 0.0;
  for (std::size_t a = 0; a < probs_.size(); ++a)
    if (bit(a, i)) s += probs_[a];
  return s;
}

double JointBernoulli::expect_all(const std::vector<int>& set) const {
  double s = 0.0;
  for (std::size_t a = 0; a < probs_.size(); ++a)
    if (std::all_of(set.begin(), set.end(), [&](int i) { return bit(a, i); })) s += probs_[a];
  return s;
}

double JointBernoulli::total() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

JointBernoulli random_common_marginal_joint(int n, int m, int k, SplitMix64& rng) {
  if (k < 0 || k > m || m < 1) throw ParamError("random_common_marginal_joint: need 0 <= k <= m");
  JointBernoulli j(n, static_cast<double>(k) / m);
  std::vector<std::vector<int>> rows(m);
  std::vector<int> idx(m);
  for (int v = 0; v < n; ++v) {
    std::iota(idx.begin(), idx.end(), 0);
    for (int a = m; a > 1; --a) std::swap(idx[a - 1], idx[rng.below(a)]);
    for (int a = 0; a < k; ++a) rows[idx[a]].push_back(v);
  }
  for (const auto& r : rows) j.add_atom(r, 1.0 / m);
  return j;
}

namespace {

// Product-variable view: group g is the product of its base variables; ind[g][a]
// says whether atom a has all of them set.
struct Groups {
  std::vector<std::vector<int>> members;
  std::vector<std::vector<char>> ind;
};

double group_mean(const JointBernoulli& j, const Groups& g, int a) {
  double s = 0.0;
  for (std::size_t t = 0; t < j.atom_count(); ++t)
    if (g.ind[a][t]) s += j.atom_prob(t);
  return s;
}

double group_joint(const JointBernoulli& j, const Groups& g, int a, int b) {
  double s = 0.0;
  for (std::size_t t = 0; t < j.atom_count(); ++t)
    if (g.ind[a][t] && g.ind[b][t]) s += j.atom_prob(t);
  return s;
}

CovResult best_pair(const JointBernoulli& j, const Groups& g, const std::vector<int>& alive) {
  CovResult best{-1, -1, -std::numeric_limits<double>::infinity()};
  std::vector<double> mean(g.members.size());
  for (int a : alive) mean[a] = group_mean(j, g, a);
  for (std::size_t x = 0; x < alive.size(); ++x)
    for (std::size_t y = x + 1; y < alive.size(); ++y) {
      const int a = alive[x], b = alive[y];
      const double c = group_joint(j, g, a, b) - mean[a] * mean[b];
      if (c > best.cov) best = {a, b, c};
    }
  return best;
}

Groups base_groups(const JointBernoulli& j, int n) {
  Groups g;
  for (int i = 0; i < n; ++i) {
    g.members.push_back({i});
    std::vector<char> ind(j.atom_count());
    for (std::size_t t = 0; t < j.atom_count(); ++t) ind[t] = j.bit(t, i);
    g.ind.push_back(std::move(ind));
  }
  return g;
}

std::vector<int> cylinder_rec(const JointBernoulli& j, const Groups& g, int r, double p, double eps) {
  const long need_here = 1L << r;
  if (p <= 0 || std::pow(p, static_cast<double>(need_here)) <= eps || r == 0) {
    std::vector<int> out;
    for (long k = 0; k < need_here; ++k)
      out.insert(out.end(), g.members[k].begin(), g.members[k].end());
    return out;
  }
  const double e_r = eps / std::pow(2.0, static_cast<double>(need_here));
  const double p_next = p * p - e_r;
  const long pairs = r == 1 ? 1 : cylinder_n_bound(p_next, eps / 2, r - 1);
  std::vector<int> alive(g.members.size());
  std::iota(alive.begin(), alive.end(), 0);
  Groups z;
  for (long k = 0; k < pairs; ++k) {
    auto c = best_pair(j, g, alive);
    if (c.i < 0) throw InvariantError("find_positive_cylinder: ran out of variables");
    std::erase(alive, c.i);
    std::erase(alive, c.j);
    auto mem = g.members[c.i];
    mem.insert(mem.end(), g.members[c.j].begin(), g.members[c.j].end());
    std::vector<char> ind(j.atom_count());
    for (std::size_t t = 0; t < j.atom_count(); ++t) ind[t] = g.ind[c.i][t] && g.ind[c.j][t];
    z.members.push_back(std::move(mem));
    z.ind.push_back(std::move(ind));
  }
  if (r == 1) return z.members[0];
  return cylinder_rec(j, z, r - 1, p_next, eps / 2);
}

}  // namespace

CovResult max_pairwise_cov(const JointBernoulli& joint) {
  const int n = joint.size();
  if (n < 2) throw ParamError("max_pairwise_cov: need n >= 2");
  auto g = base_groups(joint, n);
  std::vector<int> alive(n);
  std::iota(alive.begin(), alive.end(), 0);
  auto best = best_pair(joint, g, alive);
  const double p = joint.declared_p();
  if (!std::isnan(p))
    ODRS_ENSURE(best.cov >= -2 * p / (n - 1) - 1e-12, "pairwise covariance below -2p/(n-1)");
  return best;
}

long cylinder_n_bound(double p, double eps, int r) {
  const long trivial = 1L << r;
  if (p <= 0 || std::pow(p, static_cast<double>(trivial)) <= eps) return trivial;
  if (r == 1) return static_cast<long>(std::ceil(2 * p / eps + 1));
  const double e_r = eps / std::pow(2.0, static_cast<double>(trivial));
  return cylinder_n_bound(p, e_r, 1) + 2 * cylinder_n_bound(p * p - e_r, eps / 2, r - 1);
}

CylinderResult find_positive_cylinder(const JointBernoulli& joint, int r, double eps) {
  const double p = joint.declared_p();
  if (std::isnan(p)) throw ParamError("find_positive_cylinder: joint needs a declared common marginal");
  if (r < 0 || eps <= 0) throw ParamError("find_positive_cylinder: need r >= 0, eps > 0");
  const long need = cylinder_n_bound(p, eps, r);
  if (joint.size() < need)
    throw ParamError("find_positive_cylinder: n = " + std::to_string(joint.size()) + " below required " +
                     std::to_string(need));
  auto g = base_groups(joint, joint.size());
  CylinderResult res;
  res.subset = cylinder_rec(joint, g, r, p, eps);
  std::sort(res.subset.begin(), res.subset.end());
  res.value = joint.expect_all(res.subset);
  res.target = std::pow(p, std::pow(2.0, r)) - eps;
  return res;
}

CylinderReport neg_cylinder_check(const BitDistribution& dist, CylinderDirection dir) {
  const int n = dist.size();
  if (n > 12) throw SizeError("neg_cylinder_check: n > 12");
  const std::size_t size = std::size_t{1} << n;
  const auto p = dist.dense();
  // up[I] = Pr[all of I are 1]; sub[C] = Pr[support ⊆ C].
  std::vector<double> up = p, sub = p;
  for (int k = 0; k < n; ++k)
    for (std::size_t m = 0; m < size; ++m)
      if (m >> k & 1) {
        up[m ^ (std::size_t{1} << k)] += up[m];
        sub[m] += sub[m ^ (std::size_t{1} << k)];
      }
  const auto marg = dist.marginals();
  CylinderReport rep;
  for (std::size_t s = 0; s < size; ++s) {
    if (std::popcount(s) < 2) continue;
    double prod1 = 1.0, prod0 = 1.0;
    for (int k = 0; k < n; ++k)
      if (s >> k & 1) {
        prod1 *= marg[k];
        prod0 *= 1 - marg[k];
      }
    if (dir != CylinderDirection::zeros) {
      const double v = up[s] - prod1;
      if (v > rep.max_violation) rep = {v, s, false};
    }
    if (dir != CylinderDirection::ones) {
      const double v = sub[(size - 1) ^ s] - prod0;
      if (v > rep.max_violation) rep = {v, s, true};
    }
  }
  return rep;
}

CovResult max_pairwise_cov(const BitDistribution& dist) {
  const int n = dist.size();
  const auto marg = dist.marginals();
  CovResult best{-1, -1, -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double both = 0.0;
      for (const auto& [m, p] : dist.probs())
        if ((m >> i & 1ULL) && (m >> j & 1ULL)) both += p;
      const double c = both - marg[i] * marg[j];
      if (c > best.cov) best = {i, j, c};
    }
  return best;
}

}  // namespace odrs
