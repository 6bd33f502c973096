#include "odrs/crs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <string>

#include "odrs/common.hpp"

namespace odrs {

double SupportDistribution::total() const {
  double s = 0.0;
  for (const auto& [m, p] : atoms) s += p;
  return s;
}

std::vector<double> SupportDistribution::marginals() const {
  std::vector<double> out(elements.size(), 0.0);
  for (const auto& [m, p] : atoms)
    for (std::size_t k = 0; k < elements.size(); ++k)
      if (m >> k & 1ULL) out[k] += p;
  return out;
}

double SupportDistribution::hit_probability(std::uint64_t s) const {
  double h = 0.0;
  for (const auto& [m, p] : atoms)
    if (m & s) h += p;
  return h;
}

nlohmann::json SupportDistribution::to_json() const {
  nlohmann::json j;
  j["elements"] = elements;
  j["atoms"] = nlohmann::json::array();
  for (const auto& [m, p] : atoms) {
    std::vector<int> set;
    for (std::size_t k = 0; k < elements.size(); ++k)
      if (m >> k & 1ULL) set.push_back(elements[k]);
    j["atoms"].push_back({{"set", set}, {"p", p}});
  }
  return j;
}

SupportDistribution SupportDistribution::from_json(const nlohmann::json& j) {
  SupportDistribution d;
  try {
    d.elements = j.at("elements").get<std::vector<int>>();
    if (d.elements.size() > 64) throw ValidationError("distribution: more than 64 elements");
    for (const auto& a : j.at("atoms")) {
      std::uint64_t m = 0;
      for (int id : a.at("set").get<std::vector<int>>()) {
        auto it = std::find(d.elements.begin(), d.elements.end(), id);
        if (it == d.elements.end())
          throw ValidationError("distribution: atom element " + std::to_string(id) + " not listed");
        m |= 1ULL << (it - d.elements.begin());
      }
      d.atoms.emplace_back(m, a.at("p").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("distribution: ") + e.what());
  }
  return d;
}

BalanceResult balance_ratio_detail(const SupportDistribution& dist, const std::vector<double>& v) {
  if (v.size() != dist.elements.size()) throw ParamError("balance_ratio: v size mismatch");
  std::vector<int> active;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] >= 0.0)) throw ParamError("balance_ratio: v must be >= 0");
    if (v[k] > 0.0) active.push_back(static_cast<int>(k));
  }
  if (active.empty()) throw ParamError("balance_ratio: no element with v > 0");
  const int d = static_cast<int>(active.size());
  if (d > 20) throw SizeError("balance_ratio: more than 20 active elements");
  const std::size_t full = (std::size_t{1} << d) - 1;

  // h[A] = Pr[R ∩ active = A]; zeta transform gives g[C] = Pr[R ∩ active ⊆ C].
  std::vector<double> g(full + 1, 0.0);
  double total = 0.0;
  for (const auto& [m, p] : dist.atoms) {
    std::size_t a = 0;
    for (int k = 0; k < d; ++k)
      if (m >> active[k] & 1ULL) a |= std::size_t{1} << k;
    g[a] += p;
    total += p;
  }
  for (int k = 0; k < d; ++k)
    for (std::size_t c = 0; c <= full; ++c)
      if (c >> k & 1) g[c] += g[c ^ (std::size_t{1} << k)];

  std::vector<double> vs(full + 1, 0.0);
  BalanceResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t s = 1; s <= full; ++s) {
    const int low = std::countr_zero(s);
    vs[s] = vs[s & (s - 1)] + v[active[low]];
    const double hit = total - g[full ^ s];
    const double r = hit / vs[s];
    if (r < best.alpha) {
      best.alpha = r;
      std::uint64_t m = 0;
      for (int k = 0; k < d; ++k)
        if (s >> k & 1) m |= 1ULL << active[k];
      best.argmin = m;
    }
  }
  best.alpha = std::max(best.alpha, 0.0);
  return best;
}

double balance_ratio(const SupportDistribution& dist, const std::vector<double>& v) {
  return balance_ratio_detail(dist, v).alpha;
}

// ---- max flow ----

MaxFlow::MaxFlow(int n) : head_(n, -1), level_(n), iter_(n) {}

int MaxFlow::add_edge(int u, int v, std::int64_t cap) {
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({v, cap, head_[u]});
  head_[u] = id;
  edges_.push_back({u, 0, head_[v]});
  head_[v] = id + 1;
  orig_.push_back(cap);
  orig_.push_back(0);
  return id;
}

bool MaxFlow::bfs(int s, int t) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<int> q;
  level_[s] = 0;
  q.push(s);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int e = head_[u]; e != -1; e = edges_[e].next)
      if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
        level_[edges_[e].to] = level_[u] + 1;
        q.push(edges_[e].to);
      }
  }
  return level_[t] >= 0;
}

std::int64_t MaxFlow::dfs(int u, int t, std::int64_t f) {
  if (u == t) return f;
  for (int& e = iter_[u]; e != -1; e = edges_[e].next) {
    auto& ed = edges_[e];
    if (ed.cap > 0 && level_[ed.to] == level_[u] + 1) {
      std::int64_t d = dfs(ed.to, t, std::min(f, ed.cap));
      if (d > 0) {
        ed.cap -= d;
        edges_[e ^ 1].cap += d;
        return d;
      }
    }
  }
  return 0;
}

std::int64_t MaxFlow::run(int s, int t) {
  std::int64_t total = 0;
  while (bfs(s, t)) {
    iter_ = head_;
    while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
  }
  return total;
}

std::int64_t MaxFlow::flow(int edge_id) const { return orig_[edge_id] - edges_[edge_id].cap; }

RealFlow max_flow(int n, const std::vector<RealEdge>& edges, int s, int t) {
  // Scale so the total source capacity stays near 2^52.
  double src_real = 0.0;
  for (const auto& e : edges)
    if (e.u == s && e.cap > 0) src_real += e.cap;
  const double scale = kFlowScale / std::exp2(std::ceil(std::log2(std::max(1.0, src_real))));
  MaxFlow mf(n);
  std::int64_t src_total = 0;
  for (const auto& e : edges)
    if (e.u == s && e.cap > 0) src_total += static_cast<std::int64_t>(std::llround(e.cap * scale));
  std::vector<int> ids;
  for (const auto& e : edges) {
    const double c = e.cap < 0 ? static_cast<double>(src_total + 1) : std::min(e.cap * scale, 4e18);
    ids.push_back(mf.add_edge(e.u, e.v, static_cast<std::int64_t>(std::llround(c))));
  }
  RealFlow out;
  out.value = static_cast<double>(mf.run(s, t)) / scale;
  for (int id : ids) out.flows.push_back(static_cast<double>(mf.flow(id)) / scale);
  return out;
}

// ---- selection ----

SelectionRule build_selector(const SupportDistribution& dist, const std::vector<double>& v) {
  SelectionRule rule;
  rule.dist = dist;
  rule.v = v;
  rule.alpha = balance_ratio(dist, v);
  const int m = dist.size();
  const int na = static_cast<int>(dist.atoms.size());
  // Nodes: 0 = src, 1..na = atoms, na+1..na+m = elements, na+m+1 = sink.
  const int src = 0, sink = na + m + 1;
  std::vector<std::int64_t> src_cap(na, 0);
  std::int64_t src_total = 0, dropped = 0;
  for (int a = 0; a < na; ++a) {
    const double p = dist.atoms[a].second;
    if (p >= 1e-15)
      src_cap[a] = static_cast<std::int64_t>(std::ceil(p * kFlowScale));
    else if (p > 0)
      ++dropped;
    src_total += src_cap[a];
  }
  // Sink capacities floor(alpha v 2^52) minus a few units so float error in
  // alpha (and atoms dropped below 1e-15) cannot make the demand unreachable.
  // The shave grows only if the first attempt falls short.
  std::unique_ptr<MaxFlow> mf;
  std::vector<std::vector<std::pair<int, int>>> mid;  // (position, edge id)
  bool saturated = false;
  for (std::int64_t shave = 16 + 5 * dropped; !saturated && shave < (std::int64_t{1} << 40); shave *= 64) {
    mf = std::make_unique<MaxFlow>(na + m + 2);
    mid.assign(na, {});
    for (int a = 0; a < na; ++a)
      if (src_cap[a] > 0) mf->add_edge(src, 1 + a, src_cap[a]);
    for (int a = 0; a < na; ++a) {
      if (src_cap[a] == 0) continue;
      for (int k = 0; k < m; ++k)
        if ((dist.atoms[a].first >> k & 1ULL) && v[k] > 0)
          mid[a].emplace_back(k, mf->add_edge(1 + a, na + 1 + k, src_total + 1));
    }
    std::int64_t demand = 0;
    for (int k = 0; k < m; ++k)
      if (v[k] > 0) {
        const auto c = std::max<std::int64_t>(
            0, static_cast<std::int64_t>(std::floor(rule.alpha * v[k] * kFlowScale)) - shave);
        demand += c;
        mf->add_edge(na + 1 + k, sink, c);
      }
    saturated = mf->run(src, sink) == demand;
  }
  ODRS_ENSURE(saturated, "CRS flow does not saturate alpha*v");

  rule.rows.resize(na);
  for (int a = 0; a < na; ++a) {
    const auto mask = dist.atoms[a].first;
    rule.index[mask] = static_cast<std::size_t>(a);
    auto& row = rule.rows[a];
    if (src_cap[a] == 0) {
      const int sz = std::popcount(mask);
      for (int k = 0; k < m; ++k)
        if (mask >> k & 1ULL) row.emplace_back(k, 1.0 / sz);
      continue;
    }
    // Dividing by the integer source capacity keeps every row sum <= 1.
    const double cap = static_cast<double>(src_cap[a]);
    for (auto [k, id] : mid[a]) {
      const double q = static_cast<double>(mf->flow(id)) / cap;
      if (q > 0) row.emplace_back(k, q);
    }
  }
  return rule;
}

int select(const SelectionRule& rule, std::uint64_t realized, double u) {
  auto it = rule.index.find(realized);
  if (it == rule.index.end()) {
    if (realized == 0) return -1;
    throw InvariantError("CRS: realized set outside the modeled support");
  }
  double cum = 0.0;
  for (auto [k, q] : rule.rows[it->second]) {
    cum += q;
    if (u < cum) {
      ODRS_ENSURE(realized >> k & 1ULL, "CRS selected outside the realized set");
      return k;
    }
  }
  return -1;
}

std::vector<double> selection_marginals(const SelectionRule& rule) {
  std::vector<double> out(rule.dist.size(), 0.0);
  for (std::size_t a = 0; a < rule.rows.size(); ++a)
    for (auto [k, q] : rule.rows[a]) out[k] += rule.dist.atoms[a].second * q;
  return out;
}

}  // namespace odrs
