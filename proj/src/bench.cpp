#include "odrs/bench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odrs/common.hpp"
#include "odrs/parallel.hpp"
#include "odrs/rng.hpp"

namespace odrs {

Rounder odrs_rounder(Algorithm alg, const ScalingParams& params) {
  Rounder r;
  r.name = to_string(alg);
  r.prepare = [alg, params](const MatchingInstance& inst) -> PlanRunner {
    auto plan = std::make_shared<std::vector<StepPlan>>(build_plan(inst, alg, params));
    auto caps = inst.capacities;
    return [plan, caps](std::uint64_t seed) { return run_plan(*plan, caps, seed); };
  };
  r.exact = [alg, params](const MatchingInstance& inst) { return edge_match_probs(inst, alg, params); };
  return r;
}

Rounder never_match_rounder() {
  Rounder r;
  r.name = "never";
  r.prepare = [](const MatchingInstance& inst) -> PlanRunner {
    const int T = inst.n_arrivals();
    return [T](std::uint64_t) { return std::vector<int>(T, -1); };
  };
  return r;
}

double bernoulli_se(double p, long n) { return n > 0 ? std::sqrt(std::max(0.0, p * (1 - p)) / n) : 0.0; }

nlohmann::json RoundReport::to_json() const {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& x : edges)
    e.push_back({{"t", x.t}, {"i", x.i}, {"x", x.x}, {"prob", x.prob}, {"se", x.se}, {"ratio", x.ratio()},
                 {"exact", x.exact}});
  return {{"algorithm", algorithm}, {"seed", seed}, {"runs", runs}, {"params", params},
          {"edges", e},           {"min_ratio", min_ratio}};
}

std::string RoundReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,i,x,prob,se,ratio,exact\n";
  for (const auto& x : edges)
    os << x.t << "," << x.i << "," << x.x << "," << x.prob << "," << x.se << "," << x.ratio() << ","
       << (x.exact ? 1 : 0) << "\n";
  return os.str();
}

namespace {

struct EdgeIndex {
  std::vector<std::vector<std::pair<int, int>>> at;  // [t] -> (node, flat index)
  std::vector<EdgeEstimate> edges;
};

EdgeIndex index_edges(const MatchingInstance& inst) {
  EdgeIndex ix;
  ix.at.resize(inst.n_arrivals());
  for (int t = 0; t < inst.n_arrivals(); ++t)
    for (const auto& e : inst.arrivals[t].edges) {
      if (e.x <= 0) continue;
      ix.at[t].push_back({e.i, static_cast<int>(ix.edges.size())});
      EdgeEstimate est;
      est.t = t;
      est.i = e.i;
      est.x = e.x;
      ix.edges.push_back(est);
    }
  return ix;
}

std::vector<long> count_matches(const PlanRunner& run, const EdgeIndex& ix, long runs, std::uint64_t seed) {
  return chunked_replicas(
      runs, std::vector<long>(ix.edges.size(), 0),
      [&](long r, std::vector<long>& acc) {
        const auto m = run(mix_seed(seed, static_cast<std::uint64_t>(r)));
        for (std::size_t t = 0; t < m.size(); ++t) {
          if (m[t] < 0) continue;
          for (const auto& [node, k] : ix.at[t])
            if (node == m[t]) ++acc[k];
        }
      },
      [](std::vector<long>& a, const std::vector<long>& b) {
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
      });
}

}  // namespace

RoundReport monte_carlo_edge_probs(const Rounder& r, const MatchingInstance& inst, long runs, std::uint64_t seed) {
  auto rep = validate(inst);
  if (!rep.ok()) throw ValidationError(rep.summary());
  if (runs < 1) throw ParamError("monte_carlo_edge_probs: runs must be positive");
  auto ix = index_edges(inst);
  const auto run = r.prepare(inst);
  const auto counts = count_matches(run, ix, runs, seed);
  RoundReport out;
  out.algorithm = r.name;
  out.seed = seed;
  out.runs = runs;
  out.edges = ix.edges;
  out.min_ratio = 1.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    auto& e = out.edges[k];
    e.prob = static_cast<double>(counts[k]) / runs;
    e.se = bernoulli_se(e.prob, runs);
    out.min_ratio = std::min(out.min_ratio, e.ratio());
  }
  return out;
}

RoundReport exact_edge_probs(const Rounder& r, const MatchingInstance& inst) {
  if (!r.exact) throw ParamError("no exact engine for " + r.name);
  RoundReport out;
  out.algorithm = r.name;
  out.min_ratio = 1.0;
  for (const auto& p : r.exact(inst)) {
    EdgeEstimate e;
    e.t = p.t;
    e.i = p.i;
    e.x = p.x;
    e.prob = p.prob;
    e.exact = true;
    out.edges.push_back(e);
    if (p.x > 0) out.min_ratio = std::min(out.min_ratio, e.ratio());
  }
  return out;
}

// ---- lower bound adversary ----

double lb_root() { return 2 * std::sqrt(2.0) - 2; }

double lb_bound(int n) {
  const double p = lb_root();
  return p + p / (2.0 * (n - 1));
}

nlohmann::json AdversaryReport::to_json() const {
  return {{"n", n},
          {"probe", {{"t1", t1}, {"t2", t2}, {"cov", probe_cov}, {"joint", probe_joint}, {"runs", n_probe}}},
          {"i", i},
          {"j", j},
          {"eval_runs", n_eval},
          {"ratio_i", ratio_i},
          {"ratio_j", ratio_j},
          {"se_i", se_i},
          {"se_j", se_j},
          {"worst_ratio", worst_ratio},
          {"worst_se", worst_se},
          {"exact_worst", exact_worst},
          {"bound", lb_bound(n)}};
}

AdversaryReport lb_adversary(const Rounder& r, int n, long n_probe, long n_eval, std::uint64_t seed) {
  if (n < 3) throw ParamError("lb_adversary: n must be >= 3");
  const auto prefix = gen_lb_prefix(n);
  const int T = prefix.n_arrivals();
  // Neighbour lists of the prefix arrivals.
  std::vector<std::vector<int>> nb(T);
  for (int t = 0; t < T; ++t)
    for (const auto& e : prefix.arrivals[t].edges) nb[t].push_back(e.i);

  // Probe: y[t], y[t]y[t'], and per-choice joint counts.
  struct Acc {
    std::vector<long> y, yy, joint;
  };
  const int K = 2;  // edges per prefix arrival
  for (const auto& v : nb) ODRS_ENSURE(static_cast<int>(v.size()) == K, "prefix arrival degree");
  Acc proto{std::vector<long>(T, 0), std::vector<long>(T * T, 0), std::vector<long>(T * K * T * K, 0)};
  const auto run = r.prepare(prefix);
  const std::uint64_t probe_seed = mix_seed(seed, 0x9E0BEULL);
  const Acc acc = chunked_replicas(
      n_probe, proto,
      [&](long rr, Acc& a) {
        const auto m = run(mix_seed(probe_seed, static_cast<std::uint64_t>(rr)));
        std::vector<int> pick(T, -1);
        for (int t = 0; t < T; ++t)
          if (m[t] >= 0) {
            ++a.y[t];
            pick[t] = m[t] == nb[t][0] ? 0 : 1;
          }
        for (int t = 0; t < T; ++t) {
          if (pick[t] < 0) continue;
          for (int u = t + 1; u < T; ++u) {
            if (pick[u] < 0) continue;
            ++a.yy[t * T + u];
            ++a.joint[((t * K + pick[t]) * T + u) * K + pick[u]];
          }
        }
      },
      [](Acc& a, const Acc& b) {
        for (std::size_t k = 0; k < a.y.size(); ++k) a.y[k] += b.y[k];
        for (std::size_t k = 0; k < a.yy.size(); ++k) a.yy[k] += b.yy[k];
        for (std::size_t k = 0; k < a.joint.size(); ++k) a.joint[k] += b.joint[k];
      });

  AdversaryReport rep;
  rep.n = n;
  rep.n_probe = n_probe;
  rep.n_eval = n_eval;
  const double N = static_cast<double>(n_probe);
  double best = -2.0;
  for (int t = 0; t < T; ++t)
    for (int u = t + 1; u < T; ++u) {
      const double cov = acc.yy[t * T + u] / N - (acc.y[t] / N) * (acc.y[u] / N);
      if (cov > best) {
        best = cov;
        rep.t1 = t;
        rep.t2 = u;
      }
    }
  rep.probe_cov = best;
  long bj = -1;
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b) {
      const long c = acc.joint[((rep.t1 * K + a) * T + rep.t2) * K + b];
      if (c > bj) {
        bj = c;
        rep.i = nb[rep.t1][a];
        rep.j = nb[rep.t2][b];
      }
    }
  rep.probe_joint = bj / N;

  // Evaluate with fresh randomness.
  auto inst = prefix;
  Arrival last;
  last.edges = {{rep.i, 0.5, 1.0}, {rep.j, 0.5, 1.0}};
  inst.arrivals.push_back(last);
  auto v = validate(inst);
  ODRS_ENSURE(v.ok(), "adversary instance is not a fractional matching: " + v.summary());
  const auto eval = r.prepare(inst);
  auto ix = index_edges(inst);
  const auto counts = count_matches(eval, ix, n_eval, mix_seed(seed, 0xE7A1ULL));
  const int nE = static_cast<int>(ix.edges.size());
  const double pi = static_cast<double>(counts[nE - 2]) / n_eval;
  const double pj = static_cast<double>(counts[nE - 1]) / n_eval;
  rep.ratio_i = pi / 0.5;
  rep.ratio_j = pj / 0.5;
  rep.se_i = bernoulli_se(pi, n_eval) / 0.5;
  rep.se_j = bernoulli_se(pj, n_eval) / 0.5;
  if (rep.ratio_i <= rep.ratio_j) {
    rep.worst_ratio = rep.ratio_i;
    rep.worst_se = rep.se_i;
  } else {
    rep.worst_ratio = rep.ratio_j;
    rep.worst_se = rep.se_j;
  }
  if (r.exact) {
    const auto ex = r.exact(inst);
    double w = 2.0;
    for (const auto& e : ex)
      if (e.t == T) w = std::min(w, e.ratio());
    rep.exact_worst = w;
  }
  return rep;
}

// ---- three node example ----

MatchingInstance three_node_instance(int i, int j) {
  MatchingInstance inst;
  inst.n_offline = 3;
  inst.capacities.assign(3, 1);
  for (int k = 0; k < 3; ++k) {
    Arrival a;
    a.edges = {{k, 0.5, 1.0}};
    inst.arrivals.push_back(a);
  }
  Arrival last;
  last.edges = {{i, 0.5, 1.0}, {j, 0.5, 1.0}};
  inst.arrivals.push_back(last);
  return inst;
}

nlohmann::json ThreeNodeReport::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (std::size_t k = 0; k < choices.size(); ++k)
    c.push_back({{"i", choices[k].first},
                 {"j", choices[k].second},
                 {"exact", exact[k]},
                 {"mc", mc[k]},
                 {"mc_se", mc_se[k]}});
  return {{"choices", c}, {"min_exact", min_exact}, {"min_mc", min_mc}};
}

ThreeNodeReport three_node_impossibility(const Rounder& r, long runs, std::uint64_t seed) {
  ThreeNodeReport rep;
  rep.choices = {{0, 1}, {0, 2}, {1, 2}};
  for (std::size_t k = 0; k < rep.choices.size(); ++k) {
    const auto inst = three_node_instance(rep.choices[k].first, rep.choices[k].second);
    double ex = -1.0;
    if (r.exact) {
      ex = 0.0;
      for (const auto& e : r.exact(inst))
        if (e.t == 3) ex += e.prob;
      rep.min_exact = rep.min_exact < 0 ? ex : std::min(rep.min_exact, ex);
    }
    rep.exact.push_back(ex);
    double p = 0.0;
    if (runs > 0) {
      const auto run = r.prepare(inst);
      const std::uint64_t s = mix_seed(seed, k);
      const long hits = chunked_replicas(
          runs, 0L, [&](long rr, long& a) { a += run(mix_seed(s, static_cast<std::uint64_t>(rr)))[3] >= 0; },
          [](long& a, long b) { a += b; });
      p = static_cast<double>(hits) / runs;
    }
    rep.mc.push_back(p);
    rep.mc_se.push_back(bernoulli_se(p, runs));
    rep.min_mc = std::min(rep.min_mc, p);
  }
  return rep;
}

}  // namespace odrs
