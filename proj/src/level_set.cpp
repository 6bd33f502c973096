#include "odrs/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "odrs/common.hpp"
#include "odrs/rng.hpp"

namespace odrs {

namespace {

constexpr int kMaxExact = 20;
constexpr double kFracEps = 1e-12;

std::vector<double> pad(const std::vector<double>& x) {
  std::vector<double> y = x;
  LevelSetState st;
  for (double v : x) st = st.advanced(v);
  const double s = st.s();
  const double c = std::ceil(s);
  if (c - s > 0) y.push_back(c - s);
  return y;
}

void check_input(const std::vector<double>& x) {
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw ParamError("level-set input outside [0,1]");
}

}  // namespace

double snap(double s) {
  const double r = std::nearbyint(s);
  return std::fabs(s - r) <= 1e-9 ? r : s;
}

LevelSetState LevelSetState::advanced(double x) const {
  LevelSetState n = *this;
  const double y = x - n.comp;
  const double t = n.sum + y;
  n.comp = (t - n.sum) - y;
  n.sum = t;
  return n;
}

double selection_probability(double s_prev, long count, double x) {
  const double s_t = snap(s_prev + x);
  const double fl_t = std::floor(s_t), ce_t = std::ceil(s_t);
  const double fl_p = std::floor(s_prev);
  double p;
  if (count == static_cast<long>(ce_t)) {
    p = 0.0;
  } else if (count < static_cast<long>(fl_t)) {
    p = 1.0;
  } else if (count == static_cast<long>(fl_t) && fl_t == fl_p) {
    p = x / (fl_p + 1.0 - s_prev);
  } else if (count == static_cast<long>(fl_t) && fl_t > fl_p && s_prev != fl_p) {
    p = (s_t - fl_t) / (s_prev - fl_p);
  } else {
    p = 0.0;
  }
  if (!(p >= -1e-9 && p <= 1.0 + 1e-9))
    throw InvariantError("level-set selection probability " + std::to_string(p) + " outside [0,1]");
  return std::clamp(p, 0.0, 1.0);
}

StepOutcome online_step(const LevelSetState& st, double x, double u) {
  StepOutcome out;
  out.p = selection_probability(st.s(), st.count, x);
  out.selected = u < out.p;
  out.state = st.advanced(x);
  out.state.count = st.count + (out.selected ? 1 : 0);
  const double s = out.state.s();
  ODRS_ENSURE(out.state.count >= static_cast<long>(std::floor(s)) &&
                  out.state.count <= static_cast<long>(std::ceil(s)),
              "level-set prefix count left {floor(s), ceil(s)}");
  return out;
}

std::vector<int> online_round(const std::vector<double>& x, std::uint64_t seed) {
  check_input(x);
  const auto y = pad(x);
  SplitMix64 rng(seed);
  LevelSetState st;
  std::vector<int> out;
  for (double v : y) {
    auto r = online_step(st, v, rng.uniform());
    out.push_back(r.selected ? 1 : 0);
    st = r.state;
  }
  out.resize(x.size());
  return out;
}

std::pair<double, double> step_pair(double a, double b, double u) {
  const double sum = a + b;
  if (sum <= 0.0) return {0.0, 0.0};
  if (sum < 1.0) {
    if (u < a / sum) return {sum, 0.0};
    return {0.0, sum};
  }
  if (u < (1.0 - b) / (2.0 - sum)) return {1.0, sum - 1.0};
  return {sum - 1.0, 1.0};
}

namespace {

double snap01(double v) {
  if (std::fabs(v) <= kFracEps) return 0.0;
  if (std::fabs(v - 1.0) <= kFracEps) return 1.0;
  return v;
}

bool fractional(double v) { return v > 0.0 && v < 1.0; }

// Indices of the two minimal-index fractional entries, or -1.
std::pair<int, int> first_two_fractional(const std::vector<double>& y) {
  int i1 = -1, i2 = -1;
  for (int i = 0; i < static_cast<int>(y.size()); ++i)
    if (fractional(y[i])) {
      if (i1 < 0) {
        i1 = i;
      } else {
        i2 = i;
        break;
      }
    }
  return {i1, i2};
}

std::uint64_t to_mask(const std::vector<double>& y) {
  std::uint64_t m = 0;
  for (int i = 0; i < static_cast<int>(y.size()); ++i) {
    ODRS_ENSURE(!fractional(y[i]), "pivotal sampling ended with a fractional entry");
    if (y[i] == 1.0) m |= 1ULL << i;
  }
  return m;
}

}  // namespace

std::vector<int> offline_pivotal(const std::vector<double>& x, std::uint64_t seed) {
  check_input(x);
  auto y = pad(x);
  for (auto& v : y) v = snap01(v);
  SplitMix64 rng(seed);
  const int n = static_cast<int>(y.size());
  for (int steps = 0;; ++steps) {
    auto [i1, i2] = first_two_fractional(y);
    if (i1 < 0) break;
    ODRS_ENSURE(i2 >= 0, "single fractional entry left in pivotal sampling");
    ODRS_ENSURE(steps < n, "pivotal sampling exceeded n-1 steps");
    auto [a, b] = step_pair(y[i1], y[i2], rng.uniform());
    y[i1] = snap01(a);
    y[i2] = snap01(b);
  }
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = y[i] == 1.0 ? 1 : 0;
  return out;
}

std::vector<int> threshold_round(const std::vector<double>& x, double tau) {
  check_input(x);
  std::vector<int> out;
  LevelSetState st;
  double prev = 0.0;
  for (double v : x) {
    st = st.advanced(v);
    const double cur = st.s();
    const double hits = std::floor(snap(cur - tau)) - std::floor(snap(prev - tau));
    out.push_back(hits >= 1.0 ? 1 : 0);
    prev = cur;
  }
  return out;
}

BitDistribution exact_dist_online(const std::vector<double>& x) {
  check_input(x);
  if (static_cast<int>(x.size()) > kMaxExact) throw SizeError("exact_dist_online: n > 20");
  const auto y = pad(x);
  struct Node {
    std::uint64_t mask;
    double p;
    LevelSetState st;
  };
  std::vector<Node> cur{{0, 1.0, LevelSetState{}}};
  for (int t = 0; t < static_cast<int>(y.size()); ++t) {
    std::vector<Node> nxt;
    for (const auto& nd : cur) {
      const double p = selection_probability(nd.st.s(), nd.st.count, y[t]);
      LevelSetState st = nd.st.advanced(y[t]);
      if (p > 0) {
        LevelSetState s1 = st;
        s1.count += 1;
        nxt.push_back({nd.mask | (1ULL << t), nd.p * p, s1});
      }
      if (p < 1) nxt.push_back({nd.mask, nd.p * (1 - p), st});
    }
    cur = std::move(nxt);
  }
  BitDistribution full(static_cast<int>(y.size()));
  for (const auto& nd : cur) full.add(nd.mask, nd.p);
  return full.truncate(static_cast<int>(x.size()));
}

BitDistribution exact_dist_offline(const std::vector<double>& x) {
  check_input(x);
  if (static_cast<int>(x.size()) > kMaxExact) throw SizeError("exact_dist_offline: n > 20");
  auto y = pad(x);
  for (auto& v : y) v = snap01(v);
  BitDistribution full(static_cast<int>(y.size()));
  std::function<void(std::vector<double>&, double, int)> rec = [&](std::vector<double>& v, double p,
                                                                    int depth) {
    auto [i1, i2] = first_two_fractional(v);
    if (i1 < 0) {
      full.add(to_mask(v), p);
      return;
    }
    ODRS_ENSURE(i2 >= 0, "single fractional entry left in pivotal sampling");
    ODRS_ENSURE(depth < static_cast<int>(v.size()), "pivotal sampling exceeded n-1 steps");
    const double a = v[i1], b = v[i2], sum = a + b;
    double pa;
    std::pair<double, double> oa, ob;
    if (sum < 1.0) {
      pa = a / sum;
      oa = {sum, 0.0};
      ob = {0.0, sum};
    } else {
      pa = (1.0 - b) / (2.0 - sum);
      oa = {1.0, sum - 1.0};
      ob = {sum - 1.0, 1.0};
    }
    for (int branch = 0; branch < 2; ++branch) {
      const double q = branch == 0 ? pa : 1.0 - pa;
      if (q <= 0) continue;
      const auto& o = branch == 0 ? oa : ob;
      v[i1] = snap01(o.first);
      v[i2] = snap01(o.second);
      rec(v, p * q, depth + 1);
    }
    v[i1] = a;
    v[i2] = b;
  };
  rec(y, 1.0, 0);
  return full.truncate(static_cast<int>(x.size()));
}

BitDistribution exact_dist_threshold(const std::vector<double>& x) {
  check_input(x);
  std::vector<double> cuts{0.0, 1.0};
  LevelSetState st;
  for (double v : x) {
    st = st.advanced(v);
    const double s = st.s();
    cuts.push_back(s - std::floor(s));
  }
  std::sort(cuts.begin(), cuts.end());
  BitDistribution out(static_cast<int>(x.size()));
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 1e-15) continue;
    const auto bits = threshold_round(x, 0.5 * (cuts[k] + cuts[k + 1]));
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) m |= 1ULL << i;
    out.add(m, len);
  }
  return out;
}

}  // namespace odrs
