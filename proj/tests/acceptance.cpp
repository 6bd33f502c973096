// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and must not be loosened to make a run pass.
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "odrs/apps.hpp"
#include "odrs/bench.hpp"
#include "odrs/common.hpp"
#include "odrs/crs.hpp"
#include "odrs/exact.hpp"
#include "odrs/level_set.hpp"
#include "odrs/odrs.hpp"
#include "odrs/rng.hpp"
#include "odrs/stochastic.hpp"

using namespace odrs;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double secs_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> random_x(SplitMix64& rng, int n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform();
  return x;
}

// 1, 2
Outcome params_case(Variant v, double alpha_min, double eps0, double delta0) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = optimize_params(v);
  const double t = secs_since(t0);
  Outcome r;
  r.pass = o.alpha >= alpha_min && std::abs(o.eps - eps0) <= 0.003 && std::abs(o.delta - delta0) <= 0.003 && t < 10;
  r.detail = "alpha=" + fmt("%.6f", o.alpha) + " eps=" + fmt("%.5f", o.eps) + " delta=" + fmt("%.5f", o.delta) +
             " time=" + fmt("%.3fs", t);
  return r;
}

// 3
Outcome coupling() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(301);
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + static_cast<int>(rng.below(7));
    const auto x = random_x(rng, n);
    worst = std::max(worst, total_variation(exact_dist_online(x), exact_dist_offline(x)));
  }
  const double t = secs_since(t0);
  return {worst <= 1e-9 && t < 60, "max TV=" + fmt("%.3g", worst) + " over 200 vectors, time=" + fmt("%.2fs", t)};
}

// 4
Outcome level_set_props() {
  SplitMix64 rng(401);
  double marg = 0, qt = 0;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const auto x = random_x(rng, n);
    const auto d = exact_dist_online(x);
    const auto m = d.marginals();
    for (int i = 0; i < n; ++i) marg = std::max(marg, std::abs(m[i] - x[i]));
    // Pr[S_t = floor(s_t)] = floor(s_t) + 1 - s_t
    double s = 0;
    for (int t = 0; t < n; ++t) {
      s = snap(s + x[t]);
      if (s == std::floor(s)) continue;
      const std::uint64_t pre = (t + 1 == 64) ? ~0ULL : ((1ULL << (t + 1)) - 1);
      double at_floor = 0;
      for (const auto& [mask, p] : d.probs())
        if (std::popcount(mask & pre) == static_cast<int>(std::floor(s))) at_floor += p;
      qt = std::max(qt, std::abs(at_floor - (std::floor(s) + 1 - s)));
    }
  }
  // Same identity on ODRS bid counts: Pr[count above floor(s-hat)] = frac(s-hat).
  double qt_odrs = 0;
  const auto& P = optimal_params(Variant::matching);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = gen_random(6, 8, 0.6, 4000 + seed);
    const auto plan = build_plan(inst, Algorithm::odrs, P);
    std::vector<double> sh(inst.n_offline, 0.0);
    for (int t = 0; t <= inst.n_arrivals(); ++t) {
      const auto m = state_law(plan, t, inst.n_offline).marginals();
      for (int i = 0; i < inst.n_offline; ++i)
        qt_odrs = std::max(qt_odrs, std::abs(m[i] - (sh[i] - std::floor(sh[i]))));
      if (t < inst.n_arrivals())
        for (const auto& nd : plan[t].nodes) sh[nd.node] = nd.shat_next;
    }
  }
  // 10^6 sampled runs; online_step throws on a prefix breach, and the counts
  // are rechecked here.
  long breaches = 0;
  std::vector<std::vector<double>> xs;
  for (int k = 0; k < 10; ++k) xs.push_back(random_x(rng, 8));
  try {
    for (long r = 0; r < 1000000; ++r) {
      const auto& x = xs[r % xs.size()];
      const auto y = online_round(x, mix_seed(402, r));
      double s = 0;
      long c = 0;
      for (std::size_t t = 0; t < x.size(); ++t) {
        s = snap(s + x[t]);
        c += y[t];
        if (c < std::floor(s) || c > std::ceil(s)) ++breaches;
      }
    }
  } catch (const InvariantError& e) {
    return {false, std::string("invariant fired: ") + e.what()};
  }
  return {marg <= 1e-12 && qt <= 1e-12 && qt_odrs <= 1e-12 && breaches == 0,
          "marginal err=" + fmt("%.3g", marg) + " q_t err=" + fmt("%.3g", qt) + " odrs q_t err=" +
              fmt("%.3g", qt_odrs) + " prefix breaches=" + std::to_string(breaches) + "/1e6 runs"};
}

// 5
Outcome na_consequences() {
  SplitMix64 rng(501);
  double cov = -1, cyl = -1;
  auto scan = [&](const BitDistribution& d) {
    if (d.size() >= 2) cov = std::max(cov, max_pairwise_cov(d).cov);
    if (d.size() >= 2) cyl = std::max(cyl, neg_cylinder_check(d, CylinderDirection::both).max_violation);
  };
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + static_cast<int>(rng.below(5));
    scan(exact_dist_online(random_x(rng, n)));
  }
  const auto& P = optimal_params(Variant::matching);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = seed == 0 ? gen_uniform_star(6) : gen_random(6, 6, 0.7, 5000 + seed);
    const auto plan = build_plan(inst, Algorithm::odrs, P);
    for (int t = 1; t <= inst.n_arrivals(); ++t) scan(state_law(plan, t, inst.n_offline));
  }
  const double thr = max_pairwise_cov(exact_dist_threshold({0.5, 0.5, 0.5, 0.5})).cov;
  return {cov <= 1e-12 && cyl <= 1e-12 && thr > 1e-3,
          "max cov=" + fmt("%.3g", cov) + " max cylinder excess=" + fmt("%.3g", cyl) +
              " threshold warm-up cov=" + fmt("%.4f", thr)};
}

// 6
Outcome warmup_ratio() {
  const double r = rounding_ratio_exact(gen_uniform_star(10), Algorithm::warmup, {});
  const double want = 1 - std::pow(0.9, 10);
  return {std::abs(r - want) <= 1e-9 && r >= 1 - std::exp(-1.0),
          "ratio=" + fmt("%.12f", r) + " target=" + fmt("%.12f", want)};
}

// 7
Outcome improved_ratio() {
  const auto& P = optimal_params(Variant::matching);
  const auto& PB = optimal_params(Variant::b_matching);
  SplitMix64 rng(701);
  double worst = 2, worst_b = 2;
  int count = 0, count_b = 0;
  for (int k = 0; k < 60; ++k) {
    const int n = 2 + static_cast<int>(rng.below(9));
    const int T = 2 + static_cast<int>(rng.below(9));
    const double dens = 0.3 + 0.6 * rng.uniform();
    worst = std::min(worst, rounding_ratio_exact(gen_random(n, T, dens, 7000 + k), Algorithm::odrs, P));
    ++count;
    worst_b = std::min(worst_b, rounding_ratio_exact(gen_random(n, T, dens, 7100 + k, 3), Algorithm::odrs_b, PB));
    ++count_b;
  }
  for (int n = 1; n <= 10; ++n) {
    worst = std::min(worst, rounding_ratio_exact(gen_uniform_star(n), Algorithm::odrs, P));
    ++count;
  }
  return {worst >= 0.652 - 1e-9 && worst_b >= 0.646 - 1e-9,
          "matching min=" + fmt("%.6f", worst) + " over " + std::to_string(count) +
              " instances; b-matching min=" + fmt("%.6f", worst_b) + " over " + std::to_string(count_b)};
}

// 8
Outcome crs_exact() {
  SplitMix64 rng(801);
  double worst = 0;
  int cases = 0;
  while (cases < 100) {
    const int n = 1 + static_cast<int>(rng.below(6));
    SupportDistribution d;
    for (int k = 0; k < n; ++k) d.elements.push_back(k);
    double tot = 0;
    for (std::uint64_t m = 0; m < (1ULL << n); ++m)
      if (rng.uniform() < 0.7) {
        const double p = rng.uniform();
        d.atoms.emplace_back(m, p);
        tot += p;
      }
    if (d.atoms.empty() || tot == 0) continue;
    for (auto& a : d.atoms) a.second /= tot;
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform() < 0.15 ? 0.0 : rng.uniform();
    bool any = false;
    for (double x : v) any |= x > 0;
    if (!any) continue;
    const auto rule = build_selector(d, v);
    const auto m = selection_marginals(rule);
    for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(m[k] - rule.alpha * v[k]));
    ++cases;
  }
  return {worst <= 1e-9, "max |Pr[i selected] - alpha v_i|=" + fmt("%.3g", worst) + " over 100 cases"};
}

// 9
Outcome lower_bounds() {
  const double p = lb_root();
  const double residual = std::abs(1 - p - p * p / 4);
  const auto rd = odrs_rounder(Algorithm::odrs, optimal_params(Variant::matching));
  const auto adv = lb_adversary(rd, 30, 200000, 1000000, 901);
  const double limit = 0.843 + 3 * adv.worst_se;
  const auto three = three_node_impossibility(rd, 0, 902);
  return {residual <= 1e-12 && adv.worst_ratio <= limit && three.min_exact < 1 - 1e-6,
          "root residual=" + fmt("%.3g", residual) + " adversary worst=" + fmt("%.5f", adv.worst_ratio) +
              " (limit " + fmt("%.5f", limit) + ") three-node exact min=" + fmt("%.6f", three.min_exact)};
}

// 10
Outcome correlation_facts() {
  SplitMix64 rng(1001);
  int cov_ok = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + static_cast<int>(rng.below(15));
    const int m = 2 + static_cast<int>(rng.below(30));
    const int kk = 1 + static_cast<int>(rng.below(m - 1));
    const auto j = random_common_marginal_joint(n, m, kk, rng);
    const double pp = static_cast<double>(kk) / m;
    cov_ok += max_pairwise_cov(j).cov >= -2 * pp / (n - 1) - 1e-12;
  }
  struct Case {
    double p, eps;
    int r, m, k;
  };
  const Case cases[] = {{0.5, 0.1, 1, 20, 10}, {0.8, 0.3, 2, 20, 16}};
  std::string detail = "cov bound held " + std::to_string(cov_ok) + "/1000;";
  bool ok = cov_ok == 1000;
  for (const auto& c : cases) {
    const long n = cylinder_n_bound(c.p, c.eps, c.r);
    int found = 0;
    for (int k = 0; k < 100; ++k) {
      const auto j = random_common_marginal_joint(static_cast<int>(n), c.m, c.k, rng);
      try {
        const auto res = find_positive_cylinder(j, c.r, c.eps);
        found += res.subset.size() == (1u << c.r) && res.value >= res.target - 1e-12;
      } catch (const InvariantError&) {
      }
    }
    ok = ok && found == 100;
    detail += " r=" + std::to_string(c.r) + " n=" + std::to_string(n) + " found " + std::to_string(found) + "/100;";
  }
  return {ok, detail};
}

// 11
Outcome stochastic() {
  const auto& P = optimal_params(Variant::matching);
  SplitMix64 rng(1101);
  double lo = 2, hi_excess = -1;
  double sub = -1, freef = -1, bid = -1, thr = 2;
  int exact_runs = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + static_cast<int>(rng.below(6));
    const int T = 3 + static_cast<int>(rng.below(6));
    const auto inst = gen_random_stochastic(n, T, 0.6, 11000 + k);
    const auto ev = eval_vs_lp(inst, P, 1000000, 1100 + k);
    lo = std::min(lo, ev.ratio - (0.652 - 3 * ev.ratio_ci));
    hi_excess = std::max(hi_excess, ev.ratio - (1 + 4 * ev.ratio_ci));
    if (ev.exact_checked) {
      ++exact_runs;
      sub = std::max(sub, ev.exact.worst_submult);
      freef = std::max(freef, ev.exact.worst_free_floor);
      bid = std::max(bid, ev.exact.worst_bid_bound);
      thr = std::min(thr, ev.exact.worst_threshold);
    }
  }
  return {lo >= 0 && hi_excess <= 0 && exact_runs == 20 && sub <= 1e-9 && freef <= 1e-9 && bid <= 1e-9,
          "min margin over 0.652-3CI=" + fmt("%.4f", lo) + " max excess over 1+4CI=" + fmt("%.4f", hi_excess) +
              " submult=" + fmt("%.3g", sub) + " free floor=" + fmt("%.3g", freef) + " bid bound=" + fmt("%.3g", bid) +
              " exact threshold margin=" + fmt("%.4f", thr)};
}

// 12
Outcome edge_coloring() {
  const auto& P = optimal_params(Variant::matching);
  int proper = 0, max_colors = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto mg = gen_regular_multigraph(50, 256, 8, 1200 + s);
    const auto col = edge_color_online(mg, 32, Algorithm::odrs, P, s);
    const auto rep = verify_coloring(mg, col);
    proper += rep.ok;
    max_colors = std::max(max_colors, rep.colors_used);
  }
  return {proper == 10 && max_colors <= 1.7 * 256,
          "proper " + std::to_string(proper) + "/10, max colors " + std::to_string(max_colors) + " (" +
              fmt("%.3f", max_colors / 256.0) + " Delta)"};
}

// 13
Outcome cover() {
  long bad = 0;
  double worst_dev = 0;
  for (std::uint64_t inst_seed = 0; inst_seed < 3; ++inst_seed) {
    const auto cov = gen_random_cover(20, 30, 3, 2, 3, 1300 + inst_seed);
    const double alpha = cover_alpha(cov);
    double sum = 0;
    const long N = 100000;
    for (long r = 0; r < N; ++r) {
      const auto rep = verify_cover(cov, round_multistage_cover(cov, mix_seed(1301 + inst_seed, r)));
      bad += !rep.ok;
      sum += rep.ratio;
    }
    worst_dev = std::max(worst_dev, std::abs(sum / N - alpha) / alpha);
    if (alpha != 2.0) return {false, "alpha=" + fmt("%.4f", alpha)};
  }
  return {bad == 0 && worst_dev <= 0.02,
          "violations=" + std::to_string(bad) + " max relative deviation from alpha=2: " + fmt("%.4f", worst_dev)};
}

// 14
std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome reproducibility(const std::string& cli, const std::string& dir) {
  if (cli.empty()) return {false, "no CLI path given"};
  std::filesystem::create_directories(dir);
  const std::string inst = dir + "/inst.json", sinst = dir + "/sinst.json", mg = dir + "/mg.json",
                    cov = dir + "/cov.json", dist = dir + "/dist.json", v = dir + "/v.json", rep = dir + "/rep.json";
  {
    std::ofstream(dist) << R"({"elements":[0,1,2],"atoms":[{"set":[],"p":0.2},{"set":[0],"p":0.3},{"set":[0,1],"p":0.3},{"set":[2],"p":0.2}]})";
    std::ofstream(v) << "[0.5, 0.3, 0.2]";
  }
  const std::vector<std::string> setup = {
      "gen --kind random --n 6 --T 6 --seed 3 -o " + inst,
      "gen --kind stochastic --n 5 --T 5 --seed 4 -o " + sinst,
      "gen --kind multigraph --n 8 --delta 16 --parts 4 --seed 5 -o " + mg,
      "gen --kind cover --n 10 --edges 12 --d 3 --t 2 --k 3 --seed 6 -o " + cov,
      "round " + inst + " --alg odrs --n-runs 20000 --seed 9 -o " + rep,
  };
  for (const auto& c : setup)
    if (std::system((cli + " " + c + " 2>/dev/null").c_str()) != 0) return {false, "setup failed: " + c};
  const std::vector<std::string> runs = {
      "gen --kind random --n 6 --T 6 --seed 3",
      "validate " + inst,
      "round " + inst + " --alg odrs --seed 9",
      "round " + inst + " --alg odrs --n-runs 20000 --seed 9",
      "round " + inst + " --alg warmup --n-runs 20000 --seed 9 --csv",
      "round " + inst + " --alg odrs --exact",
      "round " + sinst + " --alg stochastic --n-runs 20000 --seed 2",
      "optimize-params --variant matching",
      "optimize-params --variant b-matching",
      "crs --dist " + dist + " --v " + v,
      "lowerbound --n 6 --probe 5000 --eval 20000 --three-node-runs 5000 --seed 4",
      "color " + mg + " --c 8 --seed 2",
      "color " + mg + " --c 8 --seed 2 --csv",
      "cover " + cov + " --seed 7",
      "cover " + cov + " --seed 7 --trials 2000",
      "report " + rep + " --csv",
  };
  int same = 0;
  std::string first_bad;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string out[2];
    bool ok = true;
    for (int rep_i = 0; rep_i < 2; ++rep_i) {
      const std::string path = dir + "/out" + std::to_string(k) + "_" + std::to_string(rep_i);
      ok = ok && std::system((cli + " " + runs[k] + " > " + path + " 2>/dev/null").c_str()) == 0;
      out[rep_i] = slurp(path);
    }
    if (ok && !out[0].empty() && out[0] == out[1])
      ++same;
    else if (first_bad.empty())
      first_bad = runs[k];
  }
  return {same == static_cast<int>(runs.size()),
          std::to_string(same) + "/" + std::to_string(runs.size()) + " commands byte-identical" +
              (first_bad.empty() ? "" : "; first mismatch: " + first_bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::string dir = argc > 2 ? argv[2] : "acceptance_work";
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "parameter optimum (matching)", [] { return params_case(Variant::matching, 0.6519, 0.0480, 0.0643); }},
      {2, "parameter optimum (b-matching)", [] { return params_case(Variant::b_matching, 0.6459, 0.0347, 0.0425); }},
      {3, "online/offline coupling", coupling},
      {4, "level-set properties", level_set_props},
      {5, "negative association consequences", na_consequences},
      {6, "warm-up ratio", warmup_ratio},
      {7, "improved ODRS ratio", improved_ratio},
      {8, "CRS exactness", crs_exact},
      {9, "lower bounds", lower_bounds},
      {10, "correlation facts", correlation_facts},
      {11, "stochastic arrivals", stochastic},
      {12, "edge coloring", edge_coloring},
      {13, "multi-stage cover", cover},
      {14, "CLI reproducibility", [&] { return reproducibility(cli, dir); }},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
