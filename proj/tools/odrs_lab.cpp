#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "odrs/apps.hpp"
#include "odrs/bench.hpp"
#include "odrs/common.hpp"
#include "odrs/crs.hpp"
#include "odrs/exact.hpp"
#include "odrs/instance.hpp"
#include "odrs/odrs.hpp"
#include "odrs/stochastic.hpp"

using namespace odrs;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kInvariant = 3 };

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw ValidationError("cannot write " + out);
  f << text;
  if (text.empty() || text.back() != '\n') f << "\n";
}

void emit(const json& j, const std::string& out) { emit(j.dump(2), out); }

ScalingParams pick_params(Algorithm alg, double eps, double delta) {
  const Variant v = alg == Algorithm::odrs_b ? Variant::b_matching : Variant::matching;
  if (alg == Algorithm::warmup) return ScalingParams{};
  if (eps < 0 && delta < 0) return optimal_params(v);
  const auto& opt = optimal_params(v);
  return ScalingParams::make(eps < 0 ? opt.eps : eps, delta < 0 ? opt.delta : delta, v);
}

// Kind is taken from --kind, else guessed from the keys.
std::string guess_kind(const json& j) {
  if (j.contains("edges") && j.contains("xstar")) return "cover";
  if (j.contains("delta") && j.contains("left")) return "multigraph";
  return "matching";
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  ~Timer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "wall time %.3f s\n", s);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"odrs-lab: online dependent rounding workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  app.add_option("-o,--out", out, "output file (default stdout)");

  // validate
  auto* c_validate = app.add_subcommand("validate", "check an instance file");
  std::string v_in, v_kind;
  c_validate->add_option("file", v_in)->required();
  c_validate->add_option("--kind", v_kind)->check(CLI::IsMember({"matching", "multigraph", "cover"}));

  // gen
  auto* c_gen = app.add_subcommand("gen", "generate an instance");
  std::string g_kind = "random";
  int g_n = 6, g_T = 6, g_cap = 1, g_delta = 16, g_parts = 8, g_edges = 30, g_d = 3, g_t = 2, g_k = 3;
  double g_density = 0.5;
  std::uint64_t g_seed = 1;
  c_gen->add_option("--kind", g_kind)
      ->check(CLI::IsMember({"random", "star", "lb", "stochastic", "multigraph", "cover"}));
  c_gen->add_option("--n", g_n);
  c_gen->add_option("--T", g_T);
  c_gen->add_option("--density", g_density);
  c_gen->add_option("--cap", g_cap, "max capacity (b-matching)");
  c_gen->add_option("--delta", g_delta, "multigraph degree");
  c_gen->add_option("--parts", g_parts, "perfect matchings in the multigraph");
  c_gen->add_option("--edges", g_edges, "cover hyperedges");
  c_gen->add_option("--d", g_d, "cover edge size");
  c_gen->add_option("--t", g_t, "cover demand");
  c_gen->add_option("--k", g_k, "cover stages");
  c_gen->add_option("--seed", g_seed);

  // round
  auto* c_round = app.add_subcommand("round", "round an instance");
  std::string r_in, r_alg = "odrs";
  double r_eps = -1, r_delta = -1;
  std::uint64_t r_seed = 1;
  long r_runs = 0;
  bool r_exact = false, r_csv = false;
  c_round->add_option("file", r_in)->required();
  c_round->add_option("--alg", r_alg)->check(CLI::IsMember({"warmup", "odrs", "odrs-b", "stochastic"}));
  c_round->add_option("--eps", r_eps);
  c_round->add_option("--delta", r_delta);
  c_round->add_option("--seed", r_seed);
  c_round->add_option("--n-runs", r_runs, "Monte Carlo replays (0 = one sampled matching)");
  c_round->add_flag("--exact", r_exact, "exact edge probabilities");
  c_round->add_flag("--csv", r_csv);

  // optimize-params
  auto* c_opt = app.add_subcommand("optimize-params", "optimal (eps, delta)");
  std::string o_variant = "matching";
  c_opt->add_option("--variant", o_variant)->check(CLI::IsMember({"matching", "b-matching", "b_matching"}));

  // crs
  auto* c_crs = app.add_subcommand("crs", "contention resolution on an explicit distribution");
  std::string c_dist, c_v;
  c_crs->add_option("--dist", c_dist)->required();
  c_crs->add_option("--v", c_v, "JSON array of target weights")->required();

  // lowerbound
  auto* c_lb = app.add_subcommand("lowerbound", "adversary and three-node example");
  int l_n = 30;
  long l_probe = 200000, l_eval = 1000000, l_three = 100000;
  std::uint64_t l_seed = 1;
  std::string l_alg = "odrs";
  c_lb->add_option("--n", l_n);
  c_lb->add_option("--probe", l_probe);
  c_lb->add_option("--eval", l_eval);
  c_lb->add_option("--three-node-runs", l_three);
  c_lb->add_option("--seed", l_seed);
  c_lb->add_option("--alg", l_alg)->check(CLI::IsMember({"warmup", "odrs", "never"}));

  // color
  auto* c_color = app.add_subcommand("color", "online edge coloring of a bipartite multigraph");
  std::string k_in, k_alg = "odrs";
  int k_c = 0, k_delta_cap = 256, k_n = 50, k_parts = 8;
  std::uint64_t k_seed = 1;
  bool k_csv = false;
  c_color->add_option("file", k_in, "multigraph JSON (generated when absent)");
  c_color->add_option("--c", k_c, "block size C (default max(8, log2(n)^2))");
  c_color->add_option("--delta-cap", k_delta_cap, "degree of the generated multigraph");
  c_color->add_option("--n", k_n, "nodes per side of the generated multigraph");
  c_color->add_option("--parts", k_parts);
  c_color->add_option("--alg", k_alg)->check(CLI::IsMember({"warmup", "odrs"}));
  c_color->add_option("--seed", k_seed);
  c_color->add_flag("--csv", k_csv, "edge,copy,color table");

  // cover
  auto* c_cover = app.add_subcommand("cover", "multi-stage cover rounding");
  std::string v_cin;
  std::uint64_t v_seed = 1;
  long v_trials = 1;
  c_cover->add_option("file", v_cin)->required();
  c_cover->add_option("--seed", v_seed);
  c_cover->add_option("--trials", v_trials);

  // report
  auto* c_report = app.add_subcommand("report", "re-emit a saved round report");
  std::string p_in;
  bool p_csv = false;
  c_report->add_option("file", p_in)->required();
  c_report->add_flag("--csv", p_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    Timer timer;
    if (*c_validate) {
      const json j = load_json_file(v_in);
      const std::string kind = v_kind.empty() ? guess_kind(j) : v_kind;
      ValidationReport rep;
      if (kind == "cover")
        rep = validate(cover_from_json(j));
      else if (kind == "multigraph")
        rep = validate(multigraph_from_json(j));
      else
        rep = validate(instance_from_json(j));
      json r = {{"kind", kind}, {"ok", rep.ok()}, {"violations", json::array()}};
      for (const auto& v : rep.violations)
        r["violations"].push_back({{"kind", v.kind}, {"index", v.index}, {"magnitude", v.magnitude},
                                   {"message", v.message}});
      emit(r, out);
      return rep.ok() ? kOk : kInvalid;
    }
    if (*c_gen) {
      json j;
      if (g_kind == "random")
        j = to_json(gen_random(g_n, g_T, g_density, g_seed, g_cap));
      else if (g_kind == "star")
        j = to_json(gen_uniform_star(g_n));
      else if (g_kind == "lb")
        j = to_json(gen_lb_prefix(g_n));
      else if (g_kind == "stochastic")
        j = to_json(gen_random_stochastic(g_n, g_T, g_density, g_seed));
      else if (g_kind == "multigraph")
        j = to_json(gen_regular_multigraph(g_n, g_delta, g_parts, g_seed));
      else
        j = to_json(gen_random_cover(g_n, g_edges, g_d, g_t, g_k, g_seed));
      emit(j, out);
      return kOk;
    }
    if (*c_round) {
      const auto inst = load_json(r_in);
      auto rep = validate(inst);
      if (!rep.ok()) throw ValidationError(rep.summary());
      if (r_alg == "stochastic") {
        const auto params = pick_params(Algorithm::odrs, r_eps, r_delta);
        if (r_runs > 0) {
          const auto ev = eval_vs_lp(inst, params, r_runs, r_seed);
          json j = {{"algorithm", "stochastic"}, {"seed", r_seed},        {"runs", ev.runs},
                    {"params", params.to_json()}, {"lp_value", ev.lp_value}, {"mean_weight", ev.mean},
                    {"ci95", ev.ci},              {"ratio", ev.ratio},       {"ratio_ci95", ev.ratio_ci}};
          if (ev.exact_checked)
            j["exact_checks"] = {{"threshold_margin", ev.exact.worst_threshold},
                                 {"submultiplicativity_excess", ev.exact.worst_submult},
                                 {"free_floor_excess", ev.exact.worst_free_floor},
                                 {"bid_bound_excess", ev.exact.worst_bid_bound}};
          emit(j, out);
        } else {
          const auto sol = solve_lp(build_lp(inst));
          const auto run = stochastic_round(apply_solution(inst, sol), params, r_seed);
          emit(json{{"algorithm", "stochastic"}, {"seed", r_seed}, {"lp", sol.to_json()},
                    {"match", run.match}, {"weight", run.weight}},
               out);
        }
        return kOk;
      }
      const Algorithm alg = parse_algorithm(r_alg);
      const auto params = pick_params(alg, r_eps, r_delta);
      const auto rounder = odrs_rounder(alg, params);
      if (!r_exact && r_runs == 0) {
        const auto plan = build_plan(inst, alg, params);
        const auto m = run_plan(plan, inst.capacities, r_seed);
        emit(json{{"algorithm", to_string(alg)}, {"seed", r_seed}, {"params", params.to_json()},
                  {"matching", m}},
             out);
        return kOk;
      }
      RoundReport report = r_exact ? exact_edge_probs(rounder, inst)
                                   : monte_carlo_edge_probs(rounder, inst, r_runs, r_seed);
      report.params = params.to_json();
      if (r_exact) report.seed = r_seed;
      emit(r_csv ? report.to_csv() : report.to_json().dump(2), out);
      return kOk;
    }
    if (*c_opt) {
      const Variant v = parse_variant(o_variant);
      const auto o = optimize_params(v);
      emit(json{{"variant", to_string(v)}, {"alpha", o.alpha}, {"eps", o.eps}, {"delta", o.delta}}, out);
      return kOk;
    }
    if (*c_crs) {
      const auto dist = SupportDistribution::from_json(load_json_file(c_dist));
      std::vector<double> v;
      try {
        v = load_json_file(c_v).get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw ValidationError(std::string("v: ") + e.what());
      }
      const auto rule = build_selector(dist, v);
      const auto marg = selection_marginals(rule);
      json r = {{"alpha", rule.alpha}, {"elements", dist.elements}, {"v", v}, {"selection", marg}};
      double worst = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) worst = std::max(worst, std::abs(marg[k] - rule.alpha * v[k]));
      r["max_abs_error"] = worst;
      emit(r, out);
      return kOk;
    }
    if (*c_lb) {
      Rounder rd = l_alg == "never" ? never_match_rounder()
                                    : odrs_rounder(parse_algorithm(l_alg), pick_params(parse_algorithm(l_alg), -1, -1));
      const auto adv = lb_adversary(rd, l_n, l_probe, l_eval, l_seed);
      const auto three = three_node_impossibility(rd, l_three, mix_seed(l_seed, 3));
      const double p = lb_root();
      emit(json{{"algorithm", rd.name},
                {"seed", l_seed},
                {"root", p},
                {"root_residual", 1 - p - p * p / 4},
                {"adversary", adv.to_json()},
                {"three_node", three.to_json()}},
           out);
      return kOk;
    }
    if (*c_color) {
      const auto mg = k_in.empty() ? gen_regular_multigraph(k_n, k_delta_cap, k_parts, k_seed)
                                   : multigraph_from_json(load_json_file(k_in));
      const int C = k_c > 0 ? k_c : default_color_block(mg.left + mg.right);
      const Algorithm alg = parse_algorithm(k_alg);
      const auto col = edge_color_online(mg, C, alg, pick_params(alg, -1, -1), k_seed);
      const auto rep = verify_coloring(mg, col);
      if (!rep.ok) throw InvariantError("improper coloring: " + rep.violations.front());
      if (k_csv) {
        emit(coloring_csv(mg, col), out);
      } else {
        emit(json{{"seed", k_seed},
                  {"delta", mg.delta},
                  {"C", C},
                  {"proper", rep.ok},
                  {"colors_used", rep.colors_used},
                  {"colors_per_delta", rep.colors_per_delta},
                  {"matcher_palette", col.matcher_colors},
                  {"greedy_colors", col.greedy_colors}},
             out);
      }
      return kOk;
    }
    if (*c_cover) {
      const auto cov = cover_from_json(load_json_file(v_cin));
      if (v_trials <= 1) {
        const auto sol = round_multistage_cover(cov, v_seed);
        const auto rep = verify_cover(cov, sol);
        if (!rep.ok) throw InvariantError("coverage violated: " + rep.violations.front());
        json j = to_json(sol);
        j["seed"] = v_seed;
        j["alpha"] = cover_alpha(cov);
        j["lp_cost"] = rep.lp_cost;
        j["ratio"] = rep.ratio;
        emit(j, out);
        return kOk;
      }
      long bad = 0;
      double sum = 0.0, sq = 0.0;
      for (long r = 0; r < v_trials; ++r) {
        const auto rep = verify_cover(cov, round_multistage_cover(cov, mix_seed(v_seed, r)));
        bad += !rep.ok;
        sum += rep.ratio;
        sq += rep.ratio * rep.ratio;
      }
      const double mean = sum / v_trials;
      const double var = std::max(0.0, sq / v_trials - mean * mean);
      emit(json{{"seed", v_seed},
                {"trials", v_trials},
                {"alpha", cover_alpha(cov)},
                {"violations", bad},
                {"mean_ratio", mean},
                {"ratio_se", std::sqrt(var / v_trials)}},
           out);
      return bad == 0 ? kOk : kInvariant;
    }
    if (*c_report) {
      const json j = load_json_file(p_in);
      if (!p_csv) {
        emit(j, out);
        return kOk;
      }
      RoundReport rep;
      try {
        for (const auto& e : j.at("edges")) {
          EdgeEstimate x;
          x.t = e.at("t");
          x.i = e.at("i");
          x.x = e.at("x");
          x.prob = e.at("prob");
          x.se = e.value("se", 0.0);
          x.exact = e.value("exact", false);
          rep.edges.push_back(x);
        }
      } catch (const json::exception& e) {
        throw ValidationError(std::string("report: ") + e.what());
      }
      emit(rep.to_csv(), out);
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kInvalid;
  } catch (const SizeError& e) {
    std::cerr << "size error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ParamError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantError& e) {
    std::cerr << "invariant breach: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
  return kOk;
}
