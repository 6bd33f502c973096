#include "odrs/stochastic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "odrs/common.hpp"
#include "odrs/level_set.hpp"
#include "odrs/parallel.hpp"
#include "odrs/rng.hpp"

namespace odrs {

nlohmann::json LPSolution::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["x"] = nlohmann::json::array();
  for (std::size_t k = 0; k < vars.size(); ++k)
    j["x"].push_back({{"i", vars[k].first}, {"t", vars[k].second}, {"v", x[k]}});
  return j;
}

StochasticLP build_lp(const MatchingInstance& sinst) {
  StochasticLP lp;
  lp.n_offline = sinst.n_offline;
  lp.n_arrivals = sinst.n_arrivals();
  std::vector<std::vector<int>> by_node(sinst.n_offline);  // var indices in arrival order
  for (int t = 0; t < sinst.n_arrivals(); ++t) {
    const auto& a = sinst.arrivals[t];
    if (!(a.p > 0 && a.p <= 1)) throw ValidationError("build_lp: arrival probability outside (0,1]");
    for (const auto& e : a.edges) {
      by_node[e.i].push_back(static_cast<int>(lp.vars.size()));
      lp.vars.emplace_back(e.i, t);
      lp.c.push_back(e.w);
    }
  }
  const std::size_t nv = lp.vars.size();
  auto row = [&] { return std::vector<double>(nv, 0.0); };
  for (int i = 0; i < sinst.n_offline; ++i) {
    auto r = row();
    for (int v : by_node[i]) r[v] = 1.0;
    lp.A.push_back(r);
    lp.b.push_back(1.0);
  }
  for (int t = 0; t < sinst.n_arrivals(); ++t) {
    auto r = row();
    for (std::size_t v = 0; v < nv; ++v)
      if (lp.vars[v].second == t) r[v] = 1.0;
    lp.A.push_back(r);
    lp.b.push_back(sinst.arrivals[t].p);
  }
  // x_{i,t} + p_t sum_{t'<t} x_{i,t'} <= p_t
  for (std::size_t v = 0; v < nv; ++v) {
    const auto [i, t] = lp.vars[v];
    const double p = sinst.arrivals[t].p;
    auto r = row();
    r[v] = 1.0;
    for (int u : by_node[i])
      if (lp.vars[u].second < t) r[u] = p;
    lp.A.push_back(r);
    lp.b.push_back(p);
  }
  return lp;
}

std::vector<double> simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                                const std::vector<double>& c, double* value) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  const int cols = n + m + 1;
  constexpr double eps = 1e-12;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) {
    if (b[r] < 0) throw ParamError("simplex_max: negative right-hand side");
    for (int j = 0; j < n; ++j) T[r][j] = A[r][j];
    T[r][n + r] = 1.0;
    T[r][cols - 1] = b[r];
    basis[r] = n + r;
  }
  for (int j = 0; j < n; ++j) T[m][j] = -c[j];
  for (;;) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (T[m][j] < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = 0.0;
    for (int r = 0; r < m; ++r)
      if (T[r][enter] > eps) {
        const double ratio = T[r][cols - 1] / T[r][enter];
        if (leave < 0 || ratio < best - 1e-15 || (std::fabs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    if (leave < 0) throw InvariantError("simplex_max: unbounded");
    const double piv = T[leave][enter];
    for (auto& v : T[leave]) v /= piv;
    for (int r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = T[r][enter];
      if (f == 0.0) continue;
      for (int j = 0; j < cols; ++j) T[r][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
  }
  std::vector<double> x(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < n) x[basis[r]] = std::max(0.0, T[r][cols - 1]);
  if (value) *value = T[m][cols - 1];
  return x;
}

LPSolution solve_lp(const StochasticLP& lp) {
  LPSolution sol;
  sol.vars = lp.vars;
  sol.x = simplex_max(lp.A, lp.b, lp.c, &sol.value);
  for (std::size_t r = 0; r < lp.A.size(); ++r) {
    double lhs = 0.0;
    for (std::size_t v = 0; v < sol.x.size(); ++v) lhs += lp.A[r][v] * sol.x[v];
    ODRS_ENSURE(lhs <= lp.b[r] + 1e-7, "LP solution violates row " + std::to_string(r));
  }
  return sol;
}

MatchingInstance apply_solution(const MatchingInstance& sinst, const LPSolution& sol) {
  MatchingInstance out = sinst;
  std::size_t k = 0;
  for (auto& a : out.arrivals)
    for (auto& e : a.edges) e.x = sol.x[k++];
  return drop_zero_edges(std::move(out));
}

std::vector<StochStep> build_stochastic_plan(const MatchingInstance& xinst, const ScalingParams& params) {
  if (params.variant != Variant::matching) throw ParamError("stochastic algorithm uses matching-variant params");
  std::vector<double> sum(xinst.n_offline, 0.0), comp(xinst.n_offline, 0.0);
  std::vector<StochStep> plan;
  for (const auto& a : xinst.arrivals) {
    StochStep st;
    st.p = a.p;
    auto edges = a.edges;
    std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) { return l.i < r.i; });
    for (const auto& e : edges) {
      LevelSetState ls{sum[e.i], comp[e.i], 0};
      const double s = ls.s();
      ls = ls.advanced(e.x);
      sum[e.i] = ls.sum;
      comp[e.i] = ls.comp;
      if (e.x <= 0) continue;
      StochNode nd;
      nd.node = e.i;
      nd.x = e.x;
      nd.w = e.w;
      nd.s = s;
      nd.shat = snap(hat_cumulative(s, params));
      nd.xhat = snap(hat_cumulative(ls.s(), params)) - nd.shat;
      if (nd.xhat <= 0) continue;
      nd.size = nd.xhat / (a.p * (1 - nd.shat));
      // LP solutions are feasible to 1e-7 only.
      if (nd.size > 1 + 1e-6)
        throw InvariantError("stochastic bid probability " + std::to_string(nd.size) + " > 1");
      nd.size = std::min(nd.size, 1.0);
      nd.low = s <= params.theta + 1e-12;
      st.nodes.push_back(nd);
    }
    std::vector<std::pair<int, double>> low;
    for (int k = 0; k < static_cast<int>(st.nodes.size()); ++k)
      if (st.nodes[k].low) low.emplace_back(k, st.nodes[k].size);
    for (auto& b : first_fit(low)) st.bins.push_back(b.ids);
    for (int k = 0; k < static_cast<int>(st.nodes.size()); ++k)
      if (!st.nodes[k].low) st.bins.push_back({k});
    st.priority.resize(st.nodes.size());
    std::iota(st.priority.begin(), st.priority.end(), 0);
    std::stable_sort(st.priority.begin(), st.priority.end(),
                     [&](int l, int r) { return st.nodes[l].w > st.nodes[r].w; });
    plan.push_back(std::move(st));
  }
  return plan;
}

StochRun run_stochastic(const std::vector<StochStep>& plan, int n_offline, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<char> matched(n_offline, 0);
  StochRun run;
  for (const auto& st : plan) {
    std::vector<char> bidder(st.nodes.size(), 0);
    for (const auto& bin : st.bins) {
      const double u = rng.uniform();
      double cum = 0.0;
      for (int k : bin) {
        cum += st.nodes[k].size;
        if (u < cum) {
          if (!matched[st.nodes[k].node]) bidder[k] = 1;
          break;
        }
      }
    }
    const bool arrives = rng.uniform() < st.p;
    int pick = -1;
    if (arrives)
      for (int k : st.priority)
        if (bidder[k]) {
          pick = k;
          break;
        }
    if (pick >= 0) {
      const int node = st.nodes[pick].node;
      ODRS_ENSURE(!matched[node], "stochastic: offline node matched twice");
      matched[node] = 1;
      run.match.push_back(node);
      run.weight += st.nodes[pick].w;
    } else {
      run.match.push_back(-1);
    }
  }
  return run;
}

StochRun stochastic_round(const MatchingInstance& xinst, const ScalingParams& params, std::uint64_t seed) {
  return run_stochastic(build_stochastic_plan(xinst, params), xinst.n_offline, seed);
}

StochExact stochastic_exact(const std::vector<StochStep>& plan, int n) {
  if (n > 16) throw SizeError("stochastic_exact: n > 16");
  const std::size_t size = std::size_t{1} << n;
  StochExact ex;
  std::vector<double> cur(size, 0.0), nxt(size);
  cur[0] = 1.0;
  std::vector<double> shat(n, 0.0);
  std::vector<std::pair<std::uint64_t, double>> part, next;
  for (const auto& st : plan) {
    ex.matched_before.push_back(cur);
    ex.shat_before.insert(ex.shat_before.end(), shat.begin(), shat.end());
    const int d = static_cast<int>(st.nodes.size());
    if (d > 20) throw SizeError("stochastic_exact: arrival degree > 20");
    std::vector<double> blaw(std::size_t{1} << d, 0.0);
    std::vector<double> mprob(d, 0.0);
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::size_t M = 0; M < size; ++M) {
      const double q = cur[M];
      if (q == 0.0) continue;
      part.assign(1, {0, q});
      for (const auto& bin : st.bins) {
        double csum = 0.0;
        for (int k : bin) csum += st.nodes[k].size;
        next.clear();
        for (int j = -1; j < static_cast<int>(bin.size()); ++j) {
          const double pj = j < 0 ? std::max(0.0, 1 - csum) : st.nodes[bin[j]].size;
          if (pj == 0.0) continue;
          std::uint64_t add = 0;
          if (j >= 0 && !(M >> st.nodes[bin[j]].node & 1)) add = 1ULL << bin[j];
          for (const auto& [m, p] : part) next.emplace_back(m | add, p * pj);
        }
        std::sort(next.begin(), next.end());
        part.clear();
        for (const auto& e : next) {
          if (!part.empty() && part.back().first == e.first)
            part.back().second += e.second;
          else
            part.push_back(e);
        }
      }
      for (const auto& [P, p] : part) {
        blaw[P] += p;
        int pick = -1;
        for (int k : st.priority)
          if (P >> k & 1) {
            pick = k;
            break;
          }
        if (pick < 0) {
          nxt[M] += p;
          continue;
        }
        nxt[M | (std::size_t{1} << st.nodes[pick].node)] += p * st.p;
        nxt[M] += p * (1 - st.p);
        mprob[pick] += p * st.p;
        ex.expected_weight += p * st.p * st.nodes[pick].w;
      }
    }
    ex.bidder_law.push_back(std::move(blaw));
    ex.match_prob.push_back(std::move(mprob));
    std::swap(cur, nxt);
    for (const auto& nd : st.nodes) shat[nd.node] = nd.shat + nd.xhat;
  }
  return ex;
}

StochCheck stochastic_checks(const std::vector<StochStep>& plan, const StochExact& ex, int n, double alpha) {
  StochCheck ck;
  ck.worst_threshold = std::numeric_limits<double>::infinity();
  const std::size_t size = std::size_t{1} << n;
  for (std::size_t t = 0; t < plan.size(); ++t) {
    const auto& st = plan[t];
    const auto& mp = ex.match_prob[t];
    // Threshold form of the per-arrival guarantee.
    for (const auto& z : st.nodes) {
      double got = 0.0, want = 0.0;
      for (std::size_t k = 0; k < st.nodes.size(); ++k)
        if (st.nodes[k].w >= z.w) {
          got += mp[k];
          want += alpha * st.nodes[k].x;
        }
      ck.worst_threshold = std::min(ck.worst_threshold, got - want);
    }
    // Sub-multiplicativity and free floor from the matched-mask law.
    std::vector<double> up = ex.matched_before[t];
    for (int k = 0; k < n; ++k)
      for (std::size_t m = 0; m < size; ++m)
        if (m >> k & 1) up[m ^ (std::size_t{1} << k)] += up[m];
    const double* sh = &ex.shat_before[t * n];
    for (std::size_t S = 1; S < size; ++S) {
      double prod = 1.0;
      for (int i = 0; i < n; ++i)
        if (S >> i & 1) prod *= sh[i];
      ck.worst_submult = std::max(ck.worst_submult, up[S] - prod);
    }
    for (int i = 0; i < n; ++i)
      ck.worst_free_floor = std::max(ck.worst_free_floor, (1 - sh[i]) - (1 - up[std::size_t{1} << i]));
    // Bid-set bound over subsets of N(t).
    const int d = static_cast<int>(st.nodes.size());
    const std::size_t ls = std::size_t{1} << d;
    std::vector<double> sub = ex.bidder_law[t];
    for (int k = 0; k < d; ++k)
      for (std::size_t m = 0; m < ls; ++m)
        if (m >> k & 1) sub[m] += sub[m ^ (std::size_t{1} << k)];
    for (std::size_t S = 1; S < ls; ++S) {
      const double hit = 1.0 - sub[(ls - 1) ^ S];
      double prod = 1.0;
      for (const auto& bin : st.bins) {
        double in = 0.0;
        for (int k : bin)
          if (S >> k & 1) in += st.nodes[k].xhat / st.p;
        prod *= 1 - in;
      }
      ck.worst_bid_bound = std::max(ck.worst_bid_bound, (1 - prod) - hit);
    }
  }
  if (plan.empty()) ck.worst_threshold = 0.0;
  return ck;
}

StochEval eval_vs_lp(const MatchingInstance& sinst, const ScalingParams& params, long runs, std::uint64_t seed) {
  if (runs < 1) throw ParamError("eval_vs_lp: runs must be positive");
  StochEval ev;
  const auto sol = solve_lp(build_lp(sinst));
  ev.lp_value = sol.value;
  const auto xinst = apply_solution(sinst, sol);
  const auto plan = build_stochastic_plan(xinst, params);
  struct Acc {
    double sum = 0.0, sq = 0.0;
  };
  const Acc acc = chunked_replicas(
      runs, Acc{},
      [&](long r, Acc& a) {
        const double w = run_stochastic(plan, xinst.n_offline, mix_seed(seed, r)).weight;
        a.sum += w;
        a.sq += w * w;
      },
      [](Acc& o, const Acc& p) {
        o.sum += p.sum;
        o.sq += p.sq;
      });
  ev.runs = runs;
  ev.mean = acc.sum / runs;
  const double var = std::max(0.0, acc.sq / runs - ev.mean * ev.mean);
  ev.ci = 1.96 * std::sqrt(var / runs);
  if (ev.lp_value > 0) {
    ev.ratio = ev.mean / ev.lp_value;
    ev.ratio_ci = ev.ci / ev.lp_value;
  }
  if (sinst.n_offline <= 12) {
    const auto ex = stochastic_exact(plan, xinst.n_offline);
    ev.exact = stochastic_checks(plan, ex, xinst.n_offline);
    ev.exact_checked = true;
  }
  return ev;
}

}  // namespace odrs
