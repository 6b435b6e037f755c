#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "foi/error.hpp"
#include "foi/vectorspace.hpp"

using namespace foi;

namespace {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(n(rng));
  return v;
}

// Straight double-precision definition, one term at a time.
double naive_cosine(const std::vector<float>& x, const std::vector<float>& y) {
  long double xy = 0, xx = 0, yy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += static_cast<long double>(x[i]) * y[i];
    xx += static_cast<long double>(x[i]) * x[i];
    yy += static_cast<long double>(y[i]) * y[i];
  }
  return static_cast<double>(xy / std::sqrt(xx * yy));
}

}  // namespace

TEST(Cosine, Examples) {
  const std::vector<float> a = {0.3f, -1.5f, 2.0f};
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{1, 1}), 0.70710678, 1e-8);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine_similarity(std::vector<float>{1, 0}, std::vector<float>{1, 0, 0}), DimensionMismatch);
  EXPECT_THROW(cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 0}), ZeroNormError);
}

TEST(Cosine, PropertiesOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 1 + trial % 97;
    const auto x = random_vector(rng, dim);
    const auto y = random_vector(rng, dim);
    const double c = cosine_similarity(x, y);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    EXPECT_NEAR(c, cosine_similarity(y, x), 1e-12);
    EXPECT_NEAR(c, naive_cosine(x, y), 1e-9);

    const float k = static_cast<float>(scale(rng));
    auto xs = x;
    for (auto& v : xs) v *= k;
    EXPECT_NEAR(cosine_similarity(xs, y), c, 1e-6);
  }
}

TEST(SquaredDistance, Examples) {
  const std::vector<float> a = {1.5f, 2.0f};
  EXPECT_DOUBLE_EQ(squared_l2_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(squared_l2_distance(std::vector<float>{0, 0}, std::vector<float>{3, 4}), 25.0);
  EXPECT_DOUBLE_EQ(squared_l2_distance(std::vector<float>{1}, std::vector<float>{-1}), 4.0);
  EXPECT_THROW(squared_l2_distance(std::vector<float>{1}, std::vector<float>{1, 2}), DimensionMismatch);
}

TEST(SquaredDistance, UnitVectorIdentity) {
  // For unit vectors d^2 = 2 - 2 cos.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = random_vector(rng, 32);
    auto y = random_vector(rng, 32);
    const auto ux = l2_normalize(x), uy = l2_normalize(y);
    double d2 = 0.0;
    for (std::size_t i = 0; i < 32; ++i) d2 += (ux.values[i] - uy.values[i]) * (ux.values[i] - uy.values[i]);
    EXPECT_NEAR(d2, 2.0 - 2.0 * cosine_similarity(x, y), 1e-9);
  }
}

TEST(Normalize, Examples) {
  const auto u = l2_normalize(std::vector<float>{3, 4});
  ASSERT_EQ(u.dim(), 2u);
  EXPECT_NEAR(u.values[0], 0.6, 1e-12);
  EXPECT_NEAR(u.values[1], 0.8, 1e-12);
  EXPECT_THROW(l2_normalize(std::vector<float>{0, 0}), ZeroNormError);

  const auto e = l2_normalize(std::vector<float>{1, 0, 0});
  EXPECT_EQ(e.values, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(Normalize, UnitNormAndDirection) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = random_vector(rng, 1 + trial % 1024, trial % 2 ? 1e-3 : 1e3);
    const auto u = l2_normalize(x);
    double n2 = 0.0;
    for (double v : u.values) n2 += v * v;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-9);
    std::vector<float> back(u.values.begin(), u.values.end());
    EXPECT_NEAR(cosine_similarity(back, x), 1.0, 1e-6);
  }
}

TEST(Embedding, RejectsNonFinite) {
  EXPECT_THROW(Embedding({1.0f, std::nanf("")}), InputError);
  EXPECT_THROW(Embedding({INFINITY}), InputError);
  EXPECT_NO_THROW(Embedding({0.0f, 1.0f}));
}

TEST(Embedding, ValidateGate) {
  EXPECT_THROW(validate_embedding(Embedding{1, 2}, 3), DimensionMismatch);
  EXPECT_THROW(validate_embedding(Embedding{0, 0, 0}, 3), ZeroNormError);
  EXPECT_NO_THROW(validate_embedding(Embedding{0, 0, 1}, 3));
}

TEST(ScreeningDot, WithinStatedBound) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial) * 7 % 2048;
    const auto x = random_vector(rng, dim);
    const auto y = random_vector(rng, dim);
    long double exact = 0;
    for (std::size_t i = 0; i < dim; ++i) exact += static_cast<long double>(x[i]) * y[i];
    const double err = std::abs(screening_dot(x, y) - static_cast<double>(exact));
    EXPECT_LE(err, screening_error_bound(dim) * norm(x) * norm(y));
  }
}
