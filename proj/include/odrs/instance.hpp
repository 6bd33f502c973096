#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace odrs {

struct Edge {
  int i = 0;       // offline node
  double x = 0.0;  // fraction x_{i,t}
  double w = 1.0;  // weight (stochastic instances)
  bool operator==(const Edge&) const = default;
};

struct Arrival {
  std::vector<Edge> edges;
  double p = 1.0;  // arrival probability, stochastic instances only
  bool operator==(const Arrival&) const = default;
};

struct MatchingInstance {
  int n_offline = 0;
  std::vector<int> capacities;
  std::vector<Arrival> arrivals;
  bool operator==(const MatchingInstance&) const = default;

  int n_arrivals() const { return static_cast<int>(arrivals.size()); }
  bool is_matching() const;  // all capacities 1
};

struct Violation {
  std::string kind;  // "range", "duplicate", "arrival_sum", "offline_degree", "capacity", "probability"
  int index = -1;
  double magnitude = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const MatchingInstance& inst);

// Remove edges with x == 0.
MatchingInstance drop_zero_edges(MatchingInstance inst);

MatchingInstance gen_uniform_star(int n);
MatchingInstance gen_lb_prefix(int n);
// Random sparse instance. Each (i,t) pair is present w.p. density with a
// uniform raw weight; rows then columns are scaled down to feasibility.
// max_cap > 1 draws capacities uniformly from [1, max_cap].
MatchingInstance gen_random(int n, int T, double density, std::uint64_t seed,
                            int max_cap = 1);
// Random stochastic instance: arrival probabilities in [0.2, 1], weights in
// [0, 1]; fractions satisfy sum_i x_{i,t} <= p_t.
MatchingInstance gen_random_stochastic(int n, int T, double density,
                                       std::uint64_t seed);

nlohmann::json to_json(const MatchingInstance& inst);
// Parses, splits online nodes with "b" > 1 and drops zero edges.
MatchingInstance instance_from_json(const nlohmann::json& j);
MatchingInstance load_json(const std::string& path);
void save_json(const MatchingInstance& inst, const std::string& path);

// Multigraph for edge coloring: left nodes arrive, right nodes are offline.
struct MultiEdge {
  int j = 0;
  int kappa = 1;
  bool operator==(const MultiEdge&) const = default;
};

struct MultigraphInstance {
  int left = 0;
  int right = 0;
  int delta = 0;
  std::vector<std::vector<MultiEdge>> arrivals;  // one per left node
  bool operator==(const MultigraphInstance&) const = default;
};

ValidationReport validate(const MultigraphInstance& mg);
// Union of `parts` random perfect matchings between n left and n right
// nodes, each with a random multiplicity; multiplicities sum to delta.
MultigraphInstance gen_regular_multigraph(int n, int delta, int parts,
                                          std::uint64_t seed);
nlohmann::json to_json(const MultigraphInstance& mg);
MultigraphInstance multigraph_from_json(const nlohmann::json& j);

// Multi-stage cover. Vertex v has one integer variable per stage.
struct HyperEdge {
  std::vector<int> verts;
  int demand = 1;
  bool operator==(const HyperEdge&) const = default;
};

struct CoverInstance {
  int k = 0;           // stages
  int n_vertices = 0;
  std::vector<std::vector<double>> costs;  // [stage][vertex]
  std::vector<HyperEdge> edges;
  std::vector<std::vector<double>> xstar;  // [vertex][stage]
  bool operator==(const CoverInstance&) const = default;
};

ValidationReport validate(const CoverInstance& cov);
// Random instance with edges of size d and demand t; x* is made feasible by
// raising the entries of under-covered edges.
CoverInstance gen_random_cover(int n_vertices, int n_edges, int d, int t, int k,
                               std::uint64_t seed);
nlohmann::json to_json(const CoverInstance& cov);
CoverInstance cover_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace odrs
