#include "foi/vectorspace.hpp"

#include <algorithm>
#include <cmath>

#include "foi/error.hpp"

namespace foi {

namespace {

void require_finite(std::span<const float> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InputError("embedding component " + std::to_string(i) + " is not finite");
    }
  }
}

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch(a, b);
}

}  // namespace

Embedding::Embedding(std::vector<float> values) : values_(std::move(values)) {
  require_finite(values_);
}

Embedding::Embedding(std::initializer_list<float> values) : values_(values) {
  require_finite(values_);
}

namespace {

// Sixteen independent accumulators give the vectoriser four 4-wide chains, so
// the widening multiply-adds are not serialised on one register.
[[gnu::target_clones("avx2", "default")]]
double dot_kernel(const float* x, const float* y, std::size_t n) {
  constexpr std::size_t kLanes = 16;
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      acc[l] += static_cast<double>(x[i + l]) * static_cast<double>(y[i + l]);
    }
  }
  for (; i < n; ++i) acc[0] += static_cast<double>(x[i]) * static_cast<double>(y[i]);
  double total = 0.0;
  for (double a : acc) total += a;
  return total;
}

[[gnu::target_clones("avx2", "default")]]
double screening_kernel(const float* x, const float* y, std::size_t n) {
  constexpr std::size_t kLanes = 16;
  float acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += x[i + l] * y[i + l];
  }
  for (; i < n; ++i) acc[0] += x[i] * y[i];
  double total = 0.0;
  for (float a : acc) total += static_cast<double>(a);
  return total;
}

}  // namespace

double screening_dot(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x.size(), y.size());
  return screening_kernel(x.data(), y.data(), x.size());
}

double screening_error_bound(std::size_t n) {
  // Lane 0 sums at most n/16 + 15 rounded products; gamma_m = m u / (1 - m u)
  // with u = 2^-24, padded for the final double reduction.
  const double m = static_cast<double>(n / 16 + 16);
  const double u = 0x1p-24;
  return 1.01 * m * u / (1.0 - m * u) + 1e-12;
}

double dot(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x.size(), y.size());
  return dot_kernel(x.data(), y.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double squared_norm(std::span<const float> x) { return dot(x, x); }

double norm(std::span<const float> x) { return std::sqrt(squared_norm(x)); }

double cosine_similarity(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x.size(), y.size());
  const double nx = norm(x);
  const double ny = norm(y);
  if (nx == 0.0 || ny == 0.0) throw ZeroNormError();
  return std::clamp(dot(x, y) / (nx * ny), -1.0, 1.0);
}

double cosine_similarity(const Embedding& x, const Embedding& y) {
  return cosine_similarity(x.values(), y.values());
}

double squared_l2_distance(std::span<const float> x, std::span<const float> y) {
  require_same_dim(x.size(), y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  return acc;
}

double squared_l2_distance(const Embedding& x, const Embedding& y) {
  return squared_l2_distance(x.values(), y.values());
}

UnitVector l2_normalize(std::span<const float> x) {
  const double n = norm(x);
  if (n == 0.0) throw ZeroNormError();
  UnitVector out;
  out.values.reserve(x.size());
  for (float v : x) out.values.push_back(static_cast<double>(v) / n);
  return out;
}

UnitVector l2_normalize(const Embedding& x) { return l2_normalize(x.values()); }

void validate_embedding(const Embedding& e, std::size_t expected_dim) {
  require_same_dim(expected_dim, e.dim());
  require_finite(e.values());
  if (squared_norm(e.values()) == 0.0) throw ZeroNormError();
}

}  // namespace foi
