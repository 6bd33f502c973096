#include "odrs/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "odrs/common.hpp"
#include "odrs/rng.hpp"

namespace odrs {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

template <class T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": bad field '" + key + "': " + e.what());
  }
}

// Fisher-Yates with our own generator so streams are portable.
template <class Vec>
void shuffle(Vec& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

bool MatchingInstance::is_matching() const {
  return std::all_of(capacities.begin(), capacities.end(), [](int b) { return b == 1; });
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::string s;
  for (const auto& v : violations) s += v.message + "\n";
  return s;
}

ValidationReport validate(const MatchingInstance& inst) {
  ValidationReport rep;
  auto add = [&](std::string kind, int idx, double mag, std::string msg) {
    rep.violations.push_back({std::move(kind), idx, mag, std::move(msg)});
  };
  if (static_cast<int>(inst.capacities.size()) != inst.n_offline)
    add("structure", -1, 0, "capacities has " + std::to_string(inst.capacities.size()) +
                                " entries, expected " + std::to_string(inst.n_offline));
  for (int i = 0; i < static_cast<int>(inst.capacities.size()); ++i)
    if (inst.capacities[i] < 1)
      add("capacity", i, inst.capacities[i],
          "offline node " + std::to_string(i) + " capacity " +
              std::to_string(inst.capacities[i]) + " < 1");
  std::vector<double> deg(std::max(inst.n_offline, 0), 0.0);
  for (int t = 0; t < inst.n_arrivals(); ++t) {
    const auto& a = inst.arrivals[t];
    const std::string at = "arrival " + std::to_string(t);
    if (!(a.p > 0.0 && a.p <= 1.0))
      add("probability", t, a.p, at + " probability " + fmt_num(a.p) + " outside (0,1]");
    std::set<int> seen;
    double sum = 0.0;
    for (const auto& e : a.edges) {
      if (e.i < 0 || e.i >= inst.n_offline) {
        add("range", t, e.i, at + " offline id " + std::to_string(e.i) + " out of range");
        continue;
      }
      if (!seen.insert(e.i).second)
        add("duplicate", t, e.i, at + " duplicate offline id " + std::to_string(e.i));
      if (!(e.x >= 0.0 && e.x <= 1.0))
        add("range", t, e.x, at + " fraction " + fmt_num(e.x) + " outside [0,1]");
      if (!(e.w >= 0.0))
        add("range", t, e.w, at + " weight " + fmt_num(e.w) + " negative");
      sum += e.x;
      deg[e.i] += e.x;
    }
    if (sum > a.p + kTol)
      add("arrival_sum", t, sum,
          at + " fraction sum " + fmt_num(sum) + " > " + fmt_num(a.p));
  }
  for (int i = 0; i < inst.n_offline && i < static_cast<int>(inst.capacities.size()); ++i)
    if (deg[i] > inst.capacities[i] + kTol)
      add("offline_degree", i, deg[i],
          "offline node " + std::to_string(i) + " degree " + fmt_num(deg[i]) + " > " +
              std::to_string(inst.capacities[i]));
  return rep;
}

MatchingInstance drop_zero_edges(MatchingInstance inst) {
  for (auto& a : inst.arrivals)
    std::erase_if(a.edges, [](const Edge& e) { return e.x == 0.0; });
  return inst;
}

MatchingInstance gen_uniform_star(int n) {
  if (n < 1) throw ParamError("gen_uniform_star: n must be >= 1");
  MatchingInstance inst;
  inst.n_offline = n;
  inst.capacities.assign(n, 1);
  Arrival a;
  for (int i = 0; i < n; ++i) a.edges.push_back({i, 1.0 / n, 1.0});
  inst.arrivals.push_back(a);
  return inst;
}

MatchingInstance gen_lb_prefix(int n) {
  if (n < 2) throw ParamError("gen_lb_prefix: n must be >= 2");
  MatchingInstance inst;
  inst.n_offline = 2 * n;
  inst.capacities.assign(2 * n, 1);
  for (int t = 0; t < n; ++t) {
    Arrival a;
    a.edges = {{2 * t, 0.5, 1.0}, {2 * t + 1, 0.5, 1.0}};
    inst.arrivals.push_back(a);
  }
  return inst;
}

namespace {

// Shared core of the random generators: raw weights, row scaling to the
// arrival budget, then column scaling to capacities.
void fill_random(MatchingInstance& inst, int T, double density, SplitMix64& rng,
                 bool stochastic) {
  const int n = inst.n_offline;
  std::vector<std::vector<double>> raw(T, std::vector<double>(n, 0.0));
  inst.arrivals.assign(T, Arrival{});
  for (int t = 0; t < T; ++t) {
    if (stochastic) inst.arrivals[t].p = 0.2 + 0.8 * rng.uniform();
    // Row target in [0.3, 1] of the arrival budget.
    const double target = inst.arrivals[t].p * (0.3 + 0.7 * rng.uniform());
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (rng.uniform() < density) {
        raw[t][i] = 0.05 + rng.uniform();
        sum += raw[t][i];
      }
    if (sum > 0)
      for (int i = 0; i < n; ++i) raw[t][i] *= target / sum;
  }
  for (int i = 0; i < n; ++i) {
    double col = 0.0;
    for (int t = 0; t < T; ++t) col += raw[t][i];
    // Leave a small margin so tolerance-level float error never trips validate.
    const double cap = inst.capacities[i];
    if (col > cap)
      for (int t = 0; t < T; ++t) raw[t][i] *= cap / col * (1 - 1e-12);
  }
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      if (raw[t][i] > 0) {
        double w = stochastic ? rng.uniform() : 1.0;
        inst.arrivals[t].edges.push_back({i, std::min(1.0, raw[t][i]), w});
      }
}

}  // namespace

MatchingInstance gen_random(int n, int T, double density, std::uint64_t seed, int max_cap) {
  if (!(density > 0.0 && density <= 1.0)) throw ParamError("gen_random: density must be in (0,1]");
  if (n < 1 || T < 0 || max_cap < 1) throw ParamError("gen_random: bad sizes");
  SplitMix64 rng(seed);
  MatchingInstance inst;
  inst.n_offline = n;
  inst.capacities.resize(n);
  for (int i = 0; i < n; ++i) inst.capacities[i] = 1 + static_cast<int>(rng.below(max_cap));
  fill_random(inst, T, density, rng, false);
  return inst;
}

MatchingInstance gen_random_stochastic(int n, int T, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw ParamError("density must be in (0,1]");
  SplitMix64 rng(seed);
  MatchingInstance inst;
  inst.n_offline = n;
  inst.capacities.assign(n, 1);
  fill_random(inst, T, density, rng, true);
  return inst;
}

nlohmann::json to_json(const MatchingInstance& inst) {
  nlohmann::json j;
  j["n_offline"] = inst.n_offline;
  j["capacities"] = inst.capacities;
  j["arrivals"] = nlohmann::json::array();
  for (const auto& a : inst.arrivals) {
    nlohmann::json ja;
    if (a.p != 1.0) ja["p"] = a.p;
    ja["edges"] = nlohmann::json::array();
    for (const auto& e : a.edges) {
      nlohmann::json je{{"i", e.i}, {"x", e.x}};
      if (e.w != 1.0) je["w"] = e.w;
      ja["edges"].push_back(je);
    }
    j["arrivals"].push_back(ja);
  }
  return j;
}

MatchingInstance instance_from_json(const nlohmann::json& j) {
  MatchingInstance inst;
  inst.n_offline = field<int>(j, "n_offline", "instance");
  if (j.contains("capacities"))
    inst.capacities = field<std::vector<int>>(j, "capacities", "instance");
  else
    inst.capacities.assign(inst.n_offline, 1);
  const auto& arr = j.contains("arrivals") ? j.at("arrivals") : nlohmann::json::array();
  if (!arr.is_array()) throw ValidationError("instance: 'arrivals' must be an array");
  for (std::size_t t = 0; t < arr.size(); ++t) {
    const std::string where = "arrivals[" + std::to_string(t) + "]";
    const auto& ja = arr[t];
    Arrival a;
    if (ja.contains("p")) a.p = field<double>(ja, "p", where);
    const int b = ja.contains("b") ? field<int>(ja, "b", where) : 1;
    if (b < 1) throw ValidationError(where + ": b must be >= 1");
    const auto& je = ja.contains("edges") ? ja.at("edges") : nlohmann::json::array();
    for (std::size_t k = 0; k < je.size(); ++k) {
      const std::string ew = where + ".edges[" + std::to_string(k) + "]";
      Edge e;
      e.i = field<int>(je[k], "i", ew);
      e.x = field<double>(je[k], "x", ew) / b;
      if (je[k].contains("w")) e.w = field<double>(je[k], "w", ew);
      a.edges.push_back(e);
    }
    for (int c = 0; c < b; ++c) inst.arrivals.push_back(a);
  }
  return drop_zero_edges(std::move(inst));
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void save_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

MatchingInstance load_json(const std::string& path) {
  return instance_from_json(load_json_file(path));
}

void save_json(const MatchingInstance& inst, const std::string& path) {
  save_json_file(to_json(inst), path);
}

// ---- multigraph ----

ValidationReport validate(const MultigraphInstance& mg) {
  ValidationReport rep;
  std::vector<long> rdeg(mg.right, 0);
  if (static_cast<int>(mg.arrivals.size()) != mg.left)
    rep.violations.push_back({"structure", -1, 0, "arrival count differs from left"});
  for (int u = 0; u < static_cast<int>(mg.arrivals.size()); ++u) {
    long d = 0;
    std::set<int> seen;
    for (const auto& e : mg.arrivals[u]) {
      if (e.j < 0 || e.j >= mg.right || e.kappa < 1) {
        rep.violations.push_back({"range", u, 0, "left node " + std::to_string(u) + " bad edge"});
        continue;
      }
      if (!seen.insert(e.j).second)
        rep.violations.push_back({"duplicate", u, static_cast<double>(e.j),
                                  "left node " + std::to_string(u) + " duplicate right id " +
                                      std::to_string(e.j)});
      d += e.kappa;
      rdeg[e.j] += e.kappa;
    }
    if (d > mg.delta)
      rep.violations.push_back({"degree", u, static_cast<double>(d),
                                "left node " + std::to_string(u) + " degree " +
                                    std::to_string(d) + " > " + std::to_string(mg.delta)});
  }
  for (int j = 0; j < mg.right; ++j)
    if (rdeg[j] > mg.delta)
      rep.violations.push_back({"degree", j, static_cast<double>(rdeg[j]),
                                "right node " + std::to_string(j) + " degree " +
                                    std::to_string(rdeg[j]) + " > " + std::to_string(mg.delta)});
  return rep;
}

MultigraphInstance gen_regular_multigraph(int n, int delta, int parts, std::uint64_t seed) {
  if (n < 1 || delta < 1 || parts < 1 || parts > delta)
    throw ParamError("gen_regular_multigraph: need n >= 1 and 1 <= parts <= delta");
  SplitMix64 rng(seed);
  // Random composition of delta into `parts` positive multiplicities.
  std::vector<int> cuts;
  std::vector<int> pool(delta - 1);
  std::iota(pool.begin(), pool.end(), 1);
  shuffle(pool, rng);
  cuts.assign(pool.begin(), pool.begin() + (parts - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> kappas;
  int prev = 0;
  for (int c : cuts) {
    kappas.push_back(c - prev);
    prev = c;
  }
  kappas.push_back(delta - prev);

  std::vector<std::vector<int>> mult(n, std::vector<int>(n, 0));
  for (int k = 0; k < parts; ++k) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng);
    for (int u = 0; u < n; ++u) mult[u][perm[u]] += kappas[k];
  }
  MultigraphInstance mg;
  mg.left = mg.right = n;
  mg.delta = delta;
  mg.arrivals.resize(n);
  for (int u = 0; u < n; ++u)
    for (int j = 0; j < n; ++j)
      if (mult[u][j] > 0) mg.arrivals[u].push_back({j, mult[u][j]});
  return mg;
}

nlohmann::json to_json(const MultigraphInstance& mg) {
  nlohmann::json j{{"left", mg.left}, {"right", mg.right}, {"delta", mg.delta}};
  j["arrivals"] = nlohmann::json::array();
  for (const auto& a : mg.arrivals) {
    nlohmann::json ja;
    ja["edges"] = nlohmann::json::array();
    for (const auto& e : a) ja["edges"].push_back({{"j", e.j}, {"kappa", e.kappa}});
    j["arrivals"].push_back(ja);
  }
  return j;
}

MultigraphInstance multigraph_from_json(const nlohmann::json& j) {
  MultigraphInstance mg;
  mg.left = field<int>(j, "left", "multigraph");
  mg.right = field<int>(j, "right", "multigraph");
  mg.delta = field<int>(j, "delta", "multigraph");
  const auto& arr = j.at("arrivals");
  for (std::size_t u = 0; u < arr.size(); ++u) {
    std::vector<MultiEdge> edges;
    for (const auto& je : arr[u].at("edges"))
      edges.push_back({field<int>(je, "j", "multigraph edge"),
                       field<int>(je, "kappa", "multigraph edge")});
    mg.arrivals.push_back(edges);
  }
  return mg;
}

// ---- cover ----

ValidationReport validate(const CoverInstance& cov) {
  ValidationReport rep;
  if (static_cast<int>(cov.costs.size()) != cov.k)
    rep.violations.push_back({"structure", -1, 0, "costs must have k stages"});
  if (static_cast<int>(cov.xstar.size()) != cov.n_vertices)
    rep.violations.push_back({"structure", -1, 0, "xstar must have one row per vertex"});
  for (int v = 0; v < static_cast<int>(cov.xstar.size()); ++v) {
    if (static_cast<int>(cov.xstar[v].size()) != cov.k)
      rep.violations.push_back({"structure", v, 0, "xstar row " + std::to_string(v) + " length != k"});
    for (double z : cov.xstar[v])
      if (!(z >= 0.0))
        rep.violations.push_back({"range", v, z, "xstar entry of vertex " + std::to_string(v) + " negative"});
  }
  if (!rep.ok()) return rep;
  for (int e = 0; e < static_cast<int>(cov.edges.size()); ++e) {
    double c = 0.0;
    for (int v : cov.edges[e].verts) {
      if (v < 0 || v >= cov.n_vertices) {
        rep.violations.push_back({"range", e, static_cast<double>(v), "edge " + std::to_string(e) + " vertex out of range"});
        continue;
      }
      for (double z : cov.xstar[v]) c += z;
    }
    if (c < cov.edges[e].demand - kTol)
      rep.violations.push_back({"coverage", e, c,
                                "edge " + std::to_string(e) + " fractional coverage " + fmt_num(c) +
                                    " < " + std::to_string(cov.edges[e].demand)});
  }
  return rep;
}

CoverInstance gen_random_cover(int n_vertices, int n_edges, int d, int t, int k, std::uint64_t seed) {
  if (d < 1 || d > n_vertices || t < 1 || k < 1) throw ParamError("gen_random_cover: bad sizes");
  SplitMix64 rng(seed);
  CoverInstance cov;
  cov.k = k;
  cov.n_vertices = n_vertices;
  cov.costs.assign(k, std::vector<double>(n_vertices));
  // Later stages cost more.
  for (int l = 0; l < k; ++l)
    for (int v = 0; v < n_vertices; ++v) cov.costs[l][v] = (1.0 + l) * (0.5 + rng.uniform());
  cov.xstar.assign(n_vertices, std::vector<double>(k));
  for (int v = 0; v < n_vertices; ++v)
    for (int l = 0; l < k; ++l) cov.xstar[v][l] = 0.3 * rng.uniform();
  std::vector<int> ids(n_vertices);
  std::iota(ids.begin(), ids.end(), 0);
  for (int e = 0; e < n_edges; ++e) {
    shuffle(ids, rng);
    HyperEdge he{{ids.begin(), ids.begin() + d}, t};
    std::sort(he.verts.begin(), he.verts.end());
    double c = 0.0;
    for (int v : he.verts)
      for (double z : cov.xstar[v]) c += z;
    if (c < t) {
      // Spread the deficit over the edge's vertices, last stage first.
      const double add = (t - c) / d * (1 + 1e-9);
      for (int v : he.verts) cov.xstar[v][rng.below(k)] += add;
    }
    cov.edges.push_back(he);
  }
  return cov;
}

nlohmann::json to_json(const CoverInstance& cov) {
  nlohmann::json j{{"k", cov.k}, {"n_vertices", cov.n_vertices}};
  j["stages"] = nlohmann::json::array();
  for (const auto& c : cov.costs) j["stages"].push_back({{"costs", c}});
  j["edges"] = nlohmann::json::array();
  for (const auto& e : cov.edges) j["edges"].push_back({{"verts", e.verts}, {"demand", e.demand}});
  j["xstar"] = cov.xstar;
  return j;
}

CoverInstance cover_from_json(const nlohmann::json& j) {
  CoverInstance cov;
  cov.k = field<int>(j, "k", "cover");
  cov.xstar = field<std::vector<std::vector<double>>>(j, "xstar", "cover");
  cov.n_vertices = j.contains("n_vertices") ? field<int>(j, "n_vertices", "cover")
                                            : static_cast<int>(cov.xstar.size());
  for (const auto& s : j.at("stages")) cov.costs.push_back(field<std::vector<double>>(s, "costs", "cover stage"));
  for (const auto& e : j.at("edges"))
    cov.edges.push_back({field<std::vector<int>>(e, "verts", "cover edge"), field<int>(e, "demand", "cover edge")});
  return cov;
}

}  // namespace odrs
