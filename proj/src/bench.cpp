#include "foi/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "foi/error.hpp"
#include "json_support.hpp"

namespace foi::bench {

namespace {

using Clock = std::chrono::steady_clock;

double percentile(const std::vector<double>& sorted, double q) {
  // Nearest-rank.
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace

BenchReport bench_store(const ReferenceStore& store, std::size_t n_queries, std::uint64_t seed,
                        std::size_t workers) {
  if (store.empty()) throw InputError("cannot benchmark an empty store");
  if (n_queries == 0) throw ContractViolation("bench needs at least one query");
  workers = std::max<std::size_t>(1, workers);

  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::vector<Embedding> queries;
  queries.reserve(n_queries);
  std::vector<float> v(store.dim());
  for (std::size_t q = 0; q < n_queries; ++q) {
    float n2 = 0.0f;
    do {
      n2 = 0.0f;
      for (float& x : v) {
        x = gauss(rng);
        n2 += x * x;
      }
    } while (n2 == 0.0f);
    const float inv = 1.0f / std::sqrt(n2);
    for (float& x : v) x *= inv;
    queries.emplace_back(v);
  }

  std::vector<double> latency_ms(n_queries);
  const std::size_t warmup = n_queries / 10;

  auto run = [&](std::size_t first, std::size_t last) {
    for (std::size_t q = first; q < last; ++q) {
      const auto t0 = Clock::now();
      store.classify_frame(queries[q]);
      const auto t1 = Clock::now();
      latency_ms[q] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  };

  run(0, warmup);
  const auto start = Clock::now();
  if (workers == 1) {
    run(warmup, n_queries);
  } else {
    std::vector<std::thread> pool;
    const std::size_t span = n_queries - warmup;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t a = warmup + span * w / workers;
      const std::size_t b = warmup + span * (w + 1) / workers;
      pool.emplace_back(run, a, b);
    }
    for (auto& t : pool) t.join();
  }
  const double wall_s = std::chrono::duration<double>(Clock::now() - start).count();

  std::vector<double> measured(latency_ms.begin() + static_cast<std::ptrdiff_t>(warmup), latency_ms.end());
  std::sort(measured.begin(), measured.end());

  BenchReport r;
  r.store_size = store.size();
  r.dim = store.dim();
  r.n_queries = n_queries;
  r.warmup = warmup;
  r.measured = measured.size();
  r.workers = workers;
  r.seed = seed;
  r.p50_ms = percentile(measured, 0.50);
  r.p95_ms = percentile(measured, 0.95);
  r.max_ms = measured.back();
  r.mean_ms = std::accumulate(measured.begin(), measured.end(), 0.0) / static_cast<double>(measured.size());
  r.throughput_qps = wall_s > 0.0 ? static_cast<double>(measured.size()) / wall_s : 0.0;
  return r;
}

std::string format_report(const BenchReport& r) {
  detail::OrderedJson j;
  j["store_size"] = r.store_size;
  j["dim"] = r.dim;
  j["n_queries"] = r.n_queries;
  j["warmup"] = r.warmup;
  j["measured"] = r.measured;
  j["workers"] = r.workers;
  j["seed"] = r.seed;
  j["p50_ms"] = r.p50_ms;
  j["p95_ms"] = r.p95_ms;
  j["max_ms"] = r.max_ms;
  j["mean_ms"] = r.mean_ms;
  j["throughput_qps"] = r.throughput_qps;
  j["scope"] = "retrieval only (no neural inference)";
  return j.dump();
}

}  // namespace foi::bench
