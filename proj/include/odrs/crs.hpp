#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace odrs {

// Explicit distribution of a random subset R of `elements`. Atom masks are
// over positions in `elements` (bit k <-> elements[k]).
struct SupportDistribution {
  std::vector<int> elements;
  std::vector<std::pair<std::uint64_t, double>> atoms;

  int size() const { return static_cast<int>(elements.size()); }
  double total() const;
  std::vector<double> marginals() const;
  // Pr[R ∩ S != ∅] for a position mask S.
  double hit_probability(std::uint64_t s) const;

  nlohmann::json to_json() const;
  static SupportDistribution from_json(const nlohmann::json& j);
};

struct BalanceResult {
  double alpha = 0.0;
  std::uint64_t argmin = 0;  // position mask attaining the minimum
};

// min over nonempty S with v(S) > 0 of Pr[R∩S != ∅] / v(S). At most 20
// elements may have v > 0.
BalanceResult balance_ratio_detail(const SupportDistribution& dist, const std::vector<double>& v);
double balance_ratio(const SupportDistribution& dist, const std::vector<double>& v);

// Integer-capacity max flow (Dinic: blocking flows along shortest paths).
class MaxFlow {
 public:
  explicit MaxFlow(int n);
  int add_edge(int u, int v, std::int64_t cap);  // returns edge id
  std::int64_t run(int s, int t);
  std::int64_t flow(int edge_id) const;
  int nodes() const { return static_cast<int>(head_.size()); }

 private:
  struct E {
    int to;
    std::int64_t cap;
    int next;
  };
  bool bfs(int s, int t);
  std::int64_t dfs(int u, int t, std::int64_t f);
  std::vector<E> edges_;
  std::vector<int> head_, level_, iter_;
  std::vector<std::int64_t> orig_;
};

// Real-capacity wrapper: capacities scaled so the source side is about 2^52,
// then rounded; negative capacity means "infinite" (total source + 1).
struct RealEdge {
  int u, v;
  double cap;
};
struct RealFlow {
  double value = 0.0;
  std::vector<double> flows;
};
RealFlow max_flow(int n, const std::vector<RealEdge>& edges, int s, int t);

inline constexpr double kFlowScale = 4503599627370496.0;  // 2^52

// p_{i,S} table realizing Pr[i selected] = alpha * v_i.
struct SelectionRule {
  SupportDistribution dist;
  std::vector<double> v;
  double alpha = 0.0;
  // rows[a] lists (position, p_{i,S}) for atom a, ascending position.
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::unordered_map<std::uint64_t, std::size_t> index;
};

SelectionRule build_selector(const SupportDistribution& dist, const std::vector<double>& v);

// Returns the selected position (a member of `realized`) or -1. Throws
// InvariantError if `realized` is not in the support.
int select(const SelectionRule& rule, std::uint64_t realized, double u);

// Exact sum_S Pr[R=S] p_{i,S} per position.
std::vector<double> selection_marginals(const SelectionRule& rule);

}  // namespace odrs
