#pragma once

#include <cstdint>
#include <string>

#include "foi/reference_store.hpp"

namespace foi::bench {

struct BenchReport {
  std::size_t store_size = 0;
  std::size_t dim = 0;
  std::size_t n_queries = 0;
  std::size_t warmup = 0;    // leading queries excluded from the statistics
  std::size_t measured = 0;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  double mean_ms = 0.0;
  double throughput_qps = 0.0;
};

// Times classify_frame on random unit queries. The first 10% of queries are
// warm-up. Each query is timed on its own, also with several workers.
BenchReport bench_store(const ReferenceStore& store, std::size_t n_queries, std::uint64_t seed,
                        std::size_t workers = 1);

std::string format_report(const BenchReport& r);

}  // namespace foi::bench
