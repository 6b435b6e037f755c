#pragma once

#include <functional>
#include <span>
#include <vector>

#include "foi/vectorspace.hpp"

namespace foi::losses {

struct TripletConfig {
  double margin = 0.2;
};

// Single logistic unit: p = sigmoid(w.x + bias).
struct LogitModel {
  std::vector<double> w;
  double bias = 0.0;
};

struct LogitGradient {
  std::vector<double> w;
  double bias = 0.0;
};

struct CompositeWeights {
  double alpha = 1.0;
  double beta = 1.0;
};

struct LossTerms {
  double class_loss = 0.0;
  double box = 0.0;
  double seg_bce = 0.0;
  double seg_dice = 0.0;
};

inline constexpr double kProbabilityClamp = 1e-12;
inline constexpr double kDiceSmoothing = 1e-6;

// max(0, d2(a,p) - d2(a,n) + margin). Exactly zero iff d2(a,p) + margin <= d2(a,n).
double triplet_loss(const Embedding& anchor, const Embedding& positive,
                    const Embedding& negative, const TripletConfig& cfg = {});

// Mean binary cross-entropy; probabilities are clamped to [1e-12, 1 - 1e-12].
double bce_multilabel(std::span<const double> probs, std::span<const double> labels);

double sigmoid(double z);

// Per-sample BCE of a logistic unit, computed from the logit so it stays
// finite when the sigmoid saturates.
double bce_logit_loss(const LogitModel& model, std::span<const double> x, double y);

// dL/dw = (p - y) x, dL/dbias = p - y.
LogitGradient bce_logit_gradient(const LogitModel& model, std::span<const double> x, double y);

// 1 - (2 sum(p g) + eps) / (sum(p) + sum(g) + eps).
double dice_loss(std::span<const double> pred, std::span<const double> gt);

// class + box + alpha * seg_bce + beta * seg_dice.
double total_loss(const LossTerms& terms, const CompositeWeights& weights);

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences, one coordinate at a time.
std::vector<double> finite_difference_gradient(const ScalarFunction& f,
                                               std::span<const double> at, double step);

}  // namespace foi::losses
