#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "foi/reference_store.hpp"

namespace foi::testing {

struct OracleHit {
  std::uint64_t index;
  double similarity;
};

// Recomputes every similarity from the raw records and sorts them; shares no
// code with the store's scan.
inline std::vector<OracleHit> naive_nearest(const std::vector<ReferenceRecord>& records,
                                            const std::vector<float>& q, std::size_t k) {
  long double qq = 0;
  for (float v : q) qq += static_cast<long double>(v) * v;
  std::vector<OracleHit> all;
  for (const auto& r : records) {
    long double xy = 0, xx = 0;
    const auto e = r.embedding.values();
    for (std::size_t i = 0; i < q.size(); ++i) {
      xy += static_cast<long double>(e[i]) * q[i];
      xx += static_cast<long double>(e[i]) * e[i];
    }
    all.push_back({r.index, static_cast<double>(xy / std::sqrt(xx * qq))});
  }
  std::stable_sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    return a.similarity > b.similarity || (a.similarity == b.similarity && a.index < b.index);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

inline std::vector<float> random_direction(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> n;
  std::vector<float> v(dim);
  do {
    for (auto& x : v) x = n(rng);
  } while (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; }));
  return v;
}

}  // namespace foi::testing
