#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace foi {

inline constexpr std::size_t kDefaultEmbeddingDim = 1024;

// Appearance feature vector. Payload is 32-bit; every reduction over it is
// carried out in 64-bit. Values are always finite.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<float> values);
  Embedding(std::initializer_list<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

// Unit-norm vector kept in double precision so that normalisation does not
// lose the 1e-9 guarantees to float rounding.
struct UnitVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
};

double dot(std::span<const float> x, std::span<const float> y);
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const float> x);

// Float-accumulated dot product for candidate screening.
// |screening_dot(x, y) - x.y| <= screening_error_bound(n) * |x| |y|.
double screening_dot(std::span<const float> x, std::span<const float> y);
double screening_error_bound(std::size_t n);
double norm(std::span<const float> x);

// (x.y) / (|x| |y|), clamped to [-1, 1]. Throws ZeroNormError on a zero vector
// and DimensionMismatch on unequal lengths.
double cosine_similarity(std::span<const float> x, std::span<const float> y);
double cosine_similarity(const Embedding& x, const Embedding& y);

double squared_l2_distance(std::span<const float> x, std::span<const float> y);
double squared_l2_distance(const Embedding& x, const Embedding& y);

UnitVector l2_normalize(std::span<const float> x);
UnitVector l2_normalize(const Embedding& x);

// Ingestion gate: right dimension, finite, nonzero norm.
void validate_embedding(const Embedding& e, std::size_t expected_dim);

}  // namespace foi
