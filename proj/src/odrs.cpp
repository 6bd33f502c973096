#include "odrs/odrs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "odrs/common.hpp"
#include "odrs/level_set.hpp"

namespace odrs {

namespace {

constexpr int kMaxLocal = 20;
constexpr double kPrune = 1e-15;

void fill_tables(NodeStep& ns) {
  const double fl = std::floor(ns.shat);
  const double f = ns.shat - fl;
  const double fl_next = std::floor(ns.shat_next);
  for (int L = 0; L < 2; ++L)
    for (int c = 0; c < 2; ++c) {
      const double count = (f == 0.0 || L) ? fl : fl + 1;
      const bool bid = ns.crossing ? (L || c) : (L && c);
      ns.bid[L][c] = bid;
      ns.next_lag[L][c] = (count + (bid ? 1 : 0)) == fl_next;
    }
}

}  // namespace

std::vector<Bin> first_fit(const std::vector<std::pair<int, double>>& items) {
  std::vector<Bin> bins;
  for (const auto& [id, raw] : items) {
    if (raw > 1.0 + 1e-9) throw InvariantError("first_fit: item size " + std::to_string(raw) + " > 1");
    const double size = std::clamp(raw, 0.0, 1.0);
    auto it = std::find_if(bins.begin(), bins.end(), [&](const Bin& b) { return b.load + size <= 1.0 + 1e-12; });
    if (it == bins.end()) {
      bins.push_back(Bin{});
      it = bins.end() - 1;
    }
    it->ids.push_back(id);
    it->load += size;
  }
  return bins;
}

OdrsPlanner::OdrsPlanner(std::vector<int> capacities, Algorithm alg, ScalingParams params, double gamma)
    : caps_(std::move(capacities)),
      alg_(alg),
      params_(params),
      gamma_(gamma),
      sum_(caps_.size(), 0.0),
      comp_(caps_.size(), 0.0) {
  if (alg_ == Algorithm::odrs) {
    if (params_.variant != Variant::matching) throw ParamError("odrs needs matching-variant params");
    if (!std::all_of(caps_.begin(), caps_.end(), [](int b) { return b == 1; }))
      throw ParamError("odrs handles matchings only (all capacities 1); use odrs-b");
  }
  if (alg_ == Algorithm::odrs_b && params_.variant != Variant::b_matching)
    throw ParamError("odrs-b needs b_matching-variant params");
}

const StepPlan& OdrsPlanner::push(const Arrival& a) {
  StepPlan plan;
  auto edges = a.edges;
  std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) { return l.i < r.i; });
  for (const auto& e : edges) {
    if (e.i < 0 || e.i >= static_cast<int>(caps_.size())) throw ValidationError("edge endpoint out of range");
    LevelSetState st{sum_[e.i], comp_[e.i], 0};
    const double s = st.s();
    st = st.advanced(e.x);
    sum_[e.i] = st.sum;
    comp_[e.i] = st.comp;
    const double s_next = st.s();
    if (e.x <= 0) continue;

    NodeStep ns;
    ns.node = e.i;
    ns.x = e.x;
    if (alg_ == Algorithm::warmup) {
      ns.shat = s;
      ns.shat_next = s_next;
    } else {
      ns.shat = snap(hat_cumulative(s, params_));
      ns.shat_next = snap(hat_cumulative(s_next, params_));
    }
    ns.xhat = ns.shat_next - ns.shat;
    if (ns.xhat <= 0) continue;
    ODRS_ENSURE(ns.shat_next <= caps_[e.i] + kTol, "scaled degree exceeds capacity");
    const double fl = std::floor(ns.shat);
    const double f = ns.shat - fl;
    ns.crossing = f > 0 && ns.shat_next > fl + 1;
    if (ns.crossing) {
      ns.cand = (ns.shat_next - std::floor(ns.shat_next)) / f;
    } else {
      ns.cand = ns.xhat / (1 - f);
    }
    if (ns.cand > 1 + 1e-9) throw InvariantError("bin item size " + std::to_string(ns.cand) + " > 1");
    ns.cand = std::clamp(ns.cand, 0.0, 1.0);
    if (alg_ == Algorithm::odrs)
      ns.low = s <= params_.theta + 1e-12;
    else if (alg_ == Algorithm::odrs_b)
      ns.low = f <= params_.theta + 1e-12;
    fill_tables(ns);
    plan.nodes.push_back(ns);
  }
  const int d = static_cast<int>(plan.nodes.size());

  // Bucketing.
  auto add_ff = [&](bool low) {
    std::vector<std::pair<int, double>> items;
    for (int k = 0; k < d; ++k)
      if (!plan.nodes[k].crossing && plan.nodes[k].low == low) items.emplace_back(k, plan.nodes[k].cand);
    auto bins = first_fit(items);
    int below_half = 0;
    for (auto& b : bins) {
      if (b.load < 0.5) ++below_half;
      plan.bins.push_back({b.ids, b.load, low});
    }
    ODRS_ENSURE(below_half <= 1, "first-fit left two bins below half");
  };
  if (alg_ == Algorithm::warmup) {
    for (int k = 0; k < d; ++k) plan.bins.push_back({{k}, plan.nodes[k].cand, false});
  } else {
    add_ff(true);
    add_ff(false);
    for (int k = 0; k < d; ++k)
      if (plan.nodes[k].crossing) plan.bins.push_back({{k}, plan.nodes[k].cand, false});
  }
  if (gamma_ > 0)
    ODRS_ENSURE(static_cast<int>(plan.bins.size()) <= polytime_bin_bound(params_.delta, gamma_),
                "bin count above the downscaled bound");

  // Exact bidder law and CRS.
  if (d > kMaxLocal)
    throw SizeError("arrival with " + std::to_string(d) + " neighbours exceeds the exact-law cap of 20");
  std::vector<int> ids;
  for (const auto& ns : plan.nodes) ids.push_back(ns.node);
  plan.law = bidder_law(plan, lag_law(steps_, static_cast<int>(steps_.size()), ids));
  if (d > 0) {
    std::vector<double> v;
    for (const auto& ns : plan.nodes) v.push_back(ns.x);
    plan.rule = build_selector(plan.law, v);
    plan.alpha = plan.rule.alpha;
  }
  steps_.push_back(std::move(plan));
  return steps_.back();
}

std::vector<StepPlan> build_plan(const MatchingInstance& inst, Algorithm alg, const ScalingParams& params,
                                 double gamma) {
  OdrsPlanner planner(inst.capacities, alg, params, gamma);
  for (const auto& a : inst.arrivals) planner.push(a);
  return planner.steps();
}

std::vector<double> lag_law(const std::vector<StepPlan>& steps, int upto, const std::vector<int>& nodes) {
  const int d = static_cast<int>(nodes.size());
  if (d > kMaxLocal) throw SizeError("lag_law: more than 20 nodes");
  int max_id = 0;
  for (int id : nodes) max_id = std::max(max_id, id);
  std::vector<int> pos(max_id + 1, -1);
  for (int k = 0; k < d; ++k) pos[nodes[k]] = k;

  const std::size_t size = std::size_t{1} << d;
  std::vector<double> cur(size, 0.0), nxt(size);
  cur[size - 1] = 1.0;  // every node starts lagging (count 0 = floor 0)

  struct Member {
    int bit;
    const NodeStep* ns;
  };
  std::vector<Member> mem;
  for (int t = 0; t < upto; ++t) {
    const auto& st = steps[t];
    for (const auto& bin : st.bins) {
      mem.clear();
      double csum = 0.0;
      for (int m : bin.members) {
        const int node = st.nodes[m].node;
        if (node <= max_id && pos[node] >= 0) {
          mem.push_back({pos[node], &st.nodes[m]});
          csum += st.nodes[m].cand;
        }
      }
      if (mem.empty()) continue;
      const double none = std::max(0.0, 1.0 - csum);
      std::fill(nxt.begin(), nxt.end(), 0.0);
      for (std::size_t mask = 0; mask < size; ++mask) {
        const double q = cur[mask];
        if (q == 0.0) continue;
        for (int j = -1; j < static_cast<int>(mem.size()); ++j) {
          const double pj = j < 0 ? none : mem[j].ns->cand;
          if (pj == 0.0) continue;
          std::size_t out = mask;
          for (int k = 0; k < static_cast<int>(mem.size()); ++k) {
            const int L = (mask >> mem[k].bit) & 1;
            const bool lag = mem[k].ns->next_lag[L][k == j ? 1 : 0];
            if (lag)
              out |= std::size_t{1} << mem[k].bit;
            else
              out &= ~(std::size_t{1} << mem[k].bit);
          }
          nxt[out] += q * pj;
        }
      }
      std::swap(cur, nxt);
    }
  }
  return cur;
}

SupportDistribution bidder_law(const StepPlan& step, const std::vector<double>& lag) {
  const int d = static_cast<int>(step.nodes.size());
  SupportDistribution law;
  for (const auto& ns : step.nodes) law.elements.push_back(ns.node);
  const std::size_t size = std::size_t{1} << d;
  std::vector<double> dense(size, 0.0);
  std::vector<std::pair<std::uint64_t, double>> part, next;
  for (std::size_t state = 0; state < size; ++state) {
    const double q = lag[state];
    if (q == 0.0) continue;
    part.assign(1, {0, q});
    for (const auto& bin : step.bins) {
      double csum = 0.0;
      for (int m : bin.members) csum += step.nodes[m].cand;
      const double none = std::max(0.0, 1.0 - csum);
      next.clear();
      const int bm = static_cast<int>(bin.members.size());
      for (int j = -1; j < bm; ++j) {
        const double pj = j < 0 ? none : step.nodes[bin.members[j]].cand;
        if (pj == 0.0) continue;
        std::uint64_t add = 0;
        for (int k = 0; k < bm; ++k) {
          const int m = bin.members[k];
          const int L = (state >> m) & 1;
          if (step.nodes[m].bid[L][k == j ? 1 : 0]) add |= 1ULL << m;
        }
        for (const auto& [mask, p] : part) next.emplace_back(mask | add, p * pj);
      }
      // Merge equal masks to keep the partial list small.
      std::sort(next.begin(), next.end());
      part.clear();
      for (const auto& e : next) {
        if (!part.empty() && part.back().first == e.first)
          part.back().second += e.second;
        else
          part.push_back(e);
      }
    }
    for (const auto& [mask, p] : part) dense[mask] += p;
  }
  double kept = 0.0;
  for (std::size_t m = 0; m < size; ++m)
    if (dense[m] >= kPrune) kept += dense[m];
  for (std::size_t m = 0; m < size; ++m)
    if (dense[m] >= kPrune) law.atoms.emplace_back(m, dense[m] / kept);
  return law;
}

nlohmann::json matching_to_json(const Matching& m) {
  nlohmann::json j = nlohmann::json::array();
  for (auto [t, i] : m) j.push_back({{"arrival", t}, {"offline", i}});
  return j;
}

OdrsSampler::OdrsSampler(std::vector<int> capacities)
    : caps_(std::move(capacities)), bids_(caps_.size(), 0), matched_(caps_.size(), 0) {}

void OdrsSampler::reset() {
  std::fill(bids_.begin(), bids_.end(), 0);
  std::fill(matched_.begin(), matched_.end(), 0);
}

int OdrsSampler::step(const StepPlan& plan, SplitMix64& rng) {
  std::uint64_t bidders = 0;
  for (const auto& bin : plan.bins) {
    const double u = rng.uniform();
    int chosen = -1;
    double cum = 0.0;
    for (int m : bin.members) {
      cum += plan.nodes[m].cand;
      if (u < cum) {
        chosen = m;
        break;
      }
    }
    for (int m : bin.members) {
      const auto& ns = plan.nodes[m];
      long& S = bids_[ns.node];
      const double fl = std::floor(ns.shat);
      const bool lag = S == static_cast<long>(fl);
      ODRS_ENSURE(lag || ns.shat > fl, "bid count above an integral scaled degree");
      if (ns.bid[lag ? 1 : 0][m == chosen ? 1 : 0]) {
        ++S;
        bidders |= 1ULL << m;
      }
      ODRS_ENSURE(S >= static_cast<long>(std::floor(ns.shat_next)) &&
                      S <= static_cast<long>(std::ceil(ns.shat_next)),
                  "bid count left {floor, ceil} of the scaled degree");
    }
  }
  const double u = rng.uniform();
  if (bidders == 0) return -1;
  const int k = select(plan.rule, bidders, u);
  if (k < 0) return -1;
  const int node = plan.nodes[k].node;
  ++matched_[node];
  ODRS_ENSURE(matched_[node] <= bids_[node] && matched_[node] <= caps_[node], "offline capacity exceeded");
  return node;
}

OnlineOdrs::OnlineOdrs(std::vector<int> capacities, Algorithm alg, ScalingParams params, std::uint64_t seed,
                       double gamma)
    : planner_(capacities, alg, params, gamma), sampler_(capacities), rng_(seed) {}

int OnlineOdrs::arrive(const Arrival& a) { return sampler_.step(planner_.push(a), rng_); }

std::vector<int> run_plan(const std::vector<StepPlan>& plan, const std::vector<int>& capacities,
                          std::uint64_t seed) {
  OdrsSampler sampler(capacities);
  SplitMix64 rng(seed);
  std::vector<int> out;
  out.reserve(plan.size());
  for (const auto& st : plan) out.push_back(sampler.step(st, rng));
  return out;
}

namespace {
Matching to_matching(const std::vector<int>& v) {
  Matching m;
  for (int t = 0; t < static_cast<int>(v.size()); ++t)
    if (v[t] >= 0) m.emplace_back(t, v[t]);
  return m;
}
}  // namespace

Matching warmup_round(const MatchingInstance& inst, std::uint64_t seed) {
  return to_matching(run_plan(build_plan(inst, Algorithm::warmup, ScalingParams{}), inst.capacities, seed));
}

Matching odrs_round(const MatchingInstance& inst, const ScalingParams& params, std::uint64_t seed) {
  return to_matching(run_plan(build_plan(inst, Algorithm::odrs, params), inst.capacities, seed));
}

Matching odrs_round_b(const MatchingInstance& inst, const ScalingParams& params, std::uint64_t seed) {
  return to_matching(run_plan(build_plan(inst, Algorithm::odrs_b, params), inst.capacities, seed));
}

}  // namespace odrs
