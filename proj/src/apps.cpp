#include "odrs/apps.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

#include "odrs/common.hpp"
#include "odrs/level_set.hpp"

namespace odrs {

namespace {

double guarantee(Algorithm alg, const ScalingParams& params) {
  if (alg == Algorithm::warmup) return 1 - std::exp(-1.0);
  return ratio_bound(params);
}

}  // namespace

MatchingInstance fair_instance(const MultigraphInstance& mg, int delta_norm) {
  auto rep = validate(mg);
  if (!rep.ok()) throw ValidationError("multigraph: " + rep.summary());
  const int D = delta_norm > 0 ? delta_norm : mg.delta;
  MatchingInstance inst;
  inst.n_offline = mg.right;
  inst.capacities.assign(mg.right, 1);
  for (const auto& a : mg.arrivals) {
    Arrival arr;
    for (const auto& e : a) arr.edges.push_back({e.j, static_cast<double>(e.kappa) / D, 1.0});
    inst.arrivals.push_back(arr);
  }
  return inst;
}

FairMatcher::FairMatcher(const MultigraphInstance& mg, Algorithm alg, const ScalingParams& params)
    : mg_(&mg), inst_(fair_instance(mg)), plan_(build_plan(inst_, alg, params)), alpha_(1 / guarantee(alg, params)) {}

std::vector<ColoredCopy> FairMatcher::sample(std::uint64_t seed) const {
  const auto m = run_plan(plan_, inst_.capacities, seed);
  SplitMix64 rng(mix64(seed ^ 0x5DEECE66DULL));
  std::vector<ColoredCopy> out;
  for (int u = 0; u < static_cast<int>(m.size()); ++u) {
    if (m[u] < 0) continue;
    const auto& edges = mg_->arrivals[u];
    for (int e = 0; e < static_cast<int>(edges.size()); ++e)
      if (edges[e].j == m[u]) out.push_back({u, e, static_cast<int>(rng.below(edges[e].kappa))});
  }
  return out;
}

int default_color_block(int n) {
  const double l = std::log2(std::max(2, n));
  return std::max(8, static_cast<int>(std::ceil(l * l)));
}

namespace {

int first_free(const std::vector<char>& a, const std::vector<char>& b, int from) {
  int c = from;
  while ((c < static_cast<int>(a.size()) && a[c]) || (c < static_cast<int>(b.size()) && b[c])) ++c;
  return c;
}

void mark(std::vector<char>& v, int c) {
  if (c >= static_cast<int>(v.size())) v.resize(c + 1, 0);
  v[c] = 1;
}

int count_distinct(const EdgeColoring& col, int lo, int hi) {
  std::set<int> seen;
  for (const auto& u : col.colors)
    for (const auto& e : u)
      for (int c : e)
        if (c >= lo && c < hi) seen.insert(c);
  return static_cast<int>(seen.size());
}

}  // namespace

EdgeColoring edge_color_online(const MultigraphInstance& mg, int C, Algorithm alg, const ScalingParams& params,
                               std::uint64_t seed) {
  auto rep = validate(mg);
  if (!rep.ok()) throw ValidationError("multigraph: " + rep.summary());
  if (C < 1) throw ParamError("edge_color_online: C must be positive");
  const double alpha = 1 / guarantee(alg, params);
  const int per_round = static_cast<int>(std::ceil(alpha * C - 1e-9));
  const int rounds = mg.delta / C;
  const int K = rounds * per_round;
  constexpr double kSlack = 0.1;

  EdgeColoring col;
  col.matcher_colors = K;
  col.colors.resize(mg.left);
  std::vector<std::vector<char>> used_left(mg.left), used_right(mg.right);

  std::vector<std::unique_ptr<OnlineOdrs>> matchers;
  std::vector<std::vector<double>> budget(K, std::vector<double>(mg.right, 0.0));
  std::vector<double> norm(K);
  for (int k = 0; k < K; ++k) {
    matchers.push_back(std::make_unique<OnlineOdrs>(std::vector<int>(mg.right, 1), alg, params, mix_seed(seed, k)));
    const int r = k / per_round;
    norm[k] = std::max(1.0, mg.delta - r * C * (1 - kSlack));
  }
  SplitMix64 copy_rng(mix_seed(seed, 0xC0FFEEULL));

  for (int u = 0; u < mg.left; ++u) {
    const auto& edges = mg.arrivals[u];
    std::vector<int> res(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) res[e] = edges[e].kappa;
    col.colors[u].resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) col.colors[u][e].assign(edges[e].kappa, -1);

    for (int k = 0; k < K; ++k) {
      Arrival a;
      double row = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e)
        if (res[e] > 0) {
          a.edges.push_back({edges[e].j, res[e] / norm[k], 1.0});
          row += res[e] / norm[k];
        }
      // Keep x a feasible fractional matching even when the residual degree
      // exceeds the declared bound.
      if (row > 1)
        for (auto& ed : a.edges) ed.x /= row;
      for (auto& ed : a.edges) {
        ed.x = std::min(ed.x, std::max(0.0, 1 - budget[k][ed.i] - 1e-12));
        budget[k][ed.i] += ed.x;
      }
      std::erase_if(a.edges, [](const Edge& ed) { return ed.x <= 0; });
      const int j = matchers[k]->arrive(a);
      if (j < 0) continue;
      std::size_t e = 0;
      while (edges[e].j != j) ++e;
      ODRS_ENSURE(res[e] > 0, "fair matcher picked a fully colored edge");
      // Uniform uncolored copy.
      int pick = static_cast<int>(copy_rng.below(res[e]));
      for (int c = 0; c < edges[e].kappa; ++c)
        if (col.colors[u][e][c] < 0 && pick-- == 0) {
          ODRS_ENSURE(!(k < static_cast<int>(used_left[u].size()) && used_left[u][k]) &&
                          !(k < static_cast<int>(used_right[j].size()) && used_right[j][k]),
                      "color reused at a vertex");
          col.colors[u][e][c] = k;
          mark(used_left[u], k);
          mark(used_right[j], k);
          break;
        }
      --res[e];
    }
    // Greedy finish. A matcher color taken here closes that right node for
    // the matcher, so later arrivals cannot collide with it.
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (int c = 0; c < edges[e].kappa; ++c)
        if (col.colors[u][e][c] < 0) {
          const int j = edges[e].j;
          const int g = first_free(used_left[u], used_right[j], 0);
          col.colors[u][e][c] = g;
          mark(used_left[u], g);
          mark(used_right[j], g);
          if (g < K) budget[g][j] = 1.0;
        }
  }
  col.colors_used = count_distinct(col, 0, 1 << 30);
  col.greedy_colors = count_distinct(col, K, 1 << 30);
  return col;
}

EdgeColoring greedy_color(const MultigraphInstance& mg) {
  EdgeColoring col;
  col.colors.resize(mg.left);
  std::vector<std::vector<char>> used_left(mg.left), used_right(mg.right);
  for (int u = 0; u < mg.left; ++u) {
    const auto& edges = mg.arrivals[u];
    col.colors[u].resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      col.colors[u][e].resize(edges[e].kappa);
      for (int c = 0; c < edges[e].kappa; ++c) {
        const int g = first_free(used_left[u], used_right[edges[e].j], 0);
        col.colors[u][e][c] = g;
        mark(used_left[u], g);
        mark(used_right[edges[e].j], g);
      }
    }
  }
  col.colors_used = col.greedy_colors = count_distinct(col, 0, 1 << 30);
  return col;
}

ColoringReport verify_coloring(const MultigraphInstance& mg, const EdgeColoring& col) {
  ColoringReport rep;
  std::vector<std::set<int>> left(mg.left), right(mg.right);
  std::set<int> all;
  if (static_cast<int>(col.colors.size()) != mg.left) {
    rep.ok = false;
    rep.violations.push_back("coloring has wrong number of left nodes");
    return rep;
  }
  for (int u = 0; u < mg.left; ++u)
    for (std::size_t e = 0; e < mg.arrivals[u].size(); ++e) {
      const int j = mg.arrivals[u][e].j;
      for (int c = 0; c < mg.arrivals[u][e].kappa; ++c) {
        const int color = (e < col.colors[u].size() && c < static_cast<int>(col.colors[u][e].size()))
                              ? col.colors[u][e][c]
                              : -1;
        const std::string name =
            "edge (" + std::to_string(u) + "," + std::to_string(j) + ") copy " + std::to_string(c);
        if (color < 0) {
          rep.violations.push_back(name + " uncolored");
          continue;
        }
        if (!left[u].insert(color).second)
          rep.violations.push_back(name + " repeats color " + std::to_string(color) + " at left node " +
                                   std::to_string(u));
        if (!right[j].insert(color).second)
          rep.violations.push_back(name + " repeats color " + std::to_string(color) + " at right node " +
                                   std::to_string(j));
        all.insert(color);
      }
    }
  rep.ok = rep.violations.empty();
  rep.colors_used = static_cast<int>(all.size());
  rep.colors_per_delta = mg.delta > 0 ? static_cast<double>(rep.colors_used) / mg.delta : 0.0;
  return rep;
}

std::string coloring_csv(const MultigraphInstance& mg, const EdgeColoring& col) {
  std::ostringstream os;
  os << "edge,copy,color\n";
  for (int u = 0; u < mg.left; ++u)
    for (std::size_t e = 0; e < mg.arrivals[u].size(); ++e)
      for (std::size_t c = 0; c < col.colors[u][e].size(); ++c)
        os << u << "-" << mg.arrivals[u][e].j << "," << c << "," << col.colors[u][e][c] << "\n";
  return os.str();
}

// ---- cover ----

double cover_alpha(const CoverInstance& cov) {
  double a = 1.0;
  for (const auto& e : cov.edges) {
    const double d = static_cast<double>(e.verts.size());
    a = std::max(a, (d + e.demand - 1) / e.demand);
  }
  return a;
}

double lp_cost(const CoverInstance& cov) {
  double c = 0.0;
  for (int v = 0; v < cov.n_vertices; ++v)
    for (int l = 0; l < cov.k; ++l) c += cov.costs[l][v] * cov.xstar[v][l];
  return c;
}

CoverSolution round_multistage_cover(const CoverInstance& cov, std::uint64_t seed) {
  auto rep = validate(cov);
  if (!rep.ok()) throw ValidationError("cover: " + rep.summary());
  const double alpha = cover_alpha(cov);
  SplitMix64 rng(seed);
  CoverSolution sol;
  sol.y.assign(cov.n_vertices, std::vector<long>(cov.k, 0));
  std::vector<LevelSetState> st(cov.n_vertices);
  // Stages are revealed in order; within a stage vertices are independent.
  for (int l = 0; l < cov.k; ++l)
    for (int v = 0; v < cov.n_vertices; ++v) {
      const double z = snap(alpha * cov.xstar[v][l]);
      const double whole = std::floor(z);
      const double frac = z - whole;
      auto r = online_step(st[v], frac, rng.uniform());
      st[v] = r.state;
      sol.y[v][l] = static_cast<long>(whole) + (r.selected ? 1 : 0);
      sol.cost += cov.costs[l][v] * sol.y[v][l];
    }
  return sol;
}

CoverReport verify_cover(const CoverInstance& cov, const CoverSolution& sol) {
  CoverReport rep;
  for (int e = 0; e < static_cast<int>(cov.edges.size()); ++e) {
    long got = 0;
    for (int v : cov.edges[e].verts)
      for (long y : sol.y[v]) got += y;
    if (got < cov.edges[e].demand)
      rep.violations.push_back("edge " + std::to_string(e) + " covered " + std::to_string(got) + " < " +
                               std::to_string(cov.edges[e].demand));
  }
  rep.ok = rep.violations.empty();
  for (int v = 0; v < cov.n_vertices; ++v)
    for (int l = 0; l < cov.k; ++l) rep.cost += cov.costs[l][v] * sol.y[v][l];
  rep.lp_cost = lp_cost(cov);
  rep.ratio = rep.lp_cost > 0 ? rep.cost / rep.lp_cost : 1.0;
  return rep;
}

nlohmann::json to_json(const CoverSolution& sol) { return {{"y", sol.y}, {"cost", sol.cost}}; }

}  // namespace odrs
