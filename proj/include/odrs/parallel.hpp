#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace odrs {

// Worker count: ODRS_THREADS if set, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("ODRS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(r, acc) for r in [0, n). Replicas are grouped into fixed chunks
// whose accumulators are merged in chunk order, so the result does not depend
// on the number of workers.
template <class Acc, class Body, class Merge>
Acc chunked_replicas(long n, const Acc& proto, Body body, Merge merge, long chunk = 4096) {
  const long chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> parts(chunks, proto);
  std::atomic<long> next{0};
  auto work = [&] {
    for (long c; (c = next.fetch_add(1)) < chunks;) {
      const long hi = std::min(n, (c + 1) * chunk);
      for (long r = c * chunk; r < hi; ++r) body(r, parts[c]);
    }
  };
  const int w = static_cast<int>(std::min<long>(worker_count(), std::max(1L, chunks)));
  std::vector<std::thread> pool;
  for (int k = 1; k < w; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  Acc out = proto;
  for (const auto& p : parts) merge(out, p);
  return out;
}

}  // namespace odrs
