#include "foi/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "foi/error.hpp"

namespace foi::losses {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch(a, b);
}

}  // namespace

double triplet_loss(const Embedding& anchor, const Embedding& positive,
                    const Embedding& negative, const TripletConfig& cfg) {
  if (!(cfg.margin > 0.0)) throw ContractViolation("triplet margin must be positive");
  const double d_ap = squared_l2_distance(anchor, positive);
  const double d_an = squared_l2_distance(anchor, negative);
  // Sign of (x - y) is exact in IEEE arithmetic, so this is zero exactly when
  // d_ap + margin <= d_an.
  const double s = (d_ap + cfg.margin) - d_an;
  return s > 0.0 ? s : 0.0;
}

double bce_multilabel(std::span<const double> probs, std::span<const double> labels) {
  if (probs.empty()) throw ContractViolation("bce_multilabel needs at least one entry");
  require_same_length(probs.size(), labels.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double y = labels[i];
    acc += y * std::log(p) + (1.0 - y) * std::log1p(-p);
  }
  return -acc / static_cast<double>(probs.size());
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double logit(const LogitModel& model, std::span<const double> x) {
  require_same_length(model.w.size(), x.size());
  double z = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += model.w[i] * x[i];
  return z;
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double bce_logit_loss(const LogitModel& model, std::span<const double> x, double y) {
  const double z = logit(model, x);
  // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
  return softplus(z) - y * z;
}

LogitGradient bce_logit_gradient(const LogitModel& model, std::span<const double> x, double y) {
  const double residual = sigmoid(logit(model, x)) - y;
  LogitGradient g;
  g.w.reserve(x.size());
  for (double xi : x) g.w.push_back(residual * xi);
  g.bias = residual;
  return g;
}

double dice_loss(std::span<const double> pred, std::span<const double> gt) {
  if (pred.empty()) throw ContractViolation("dice_loss needs a non-empty mask");
  require_same_length(pred.size(), gt.size());
  double inter = 0.0, sum_p = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * gt[i];
    sum_p += pred[i];
    sum_g += gt[i];
  }
  return 1.0 - (2.0 * inter + kDiceSmoothing) / (sum_p + sum_g + kDiceSmoothing);
}

double total_loss(const LossTerms& terms, const CompositeWeights& weights) {
  return terms.class_loss + terms.box + weights.alpha * terms.seg_bce +
         weights.beta * terms.seg_dice;
}

std::vector<double> finite_difference_gradient(const ScalarFunction& f,
                                               std::span<const double> at, double step) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be positive");
  std::vector<double> point(at.begin(), at.end());
  std::vector<double> grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = f(point);
    point[i] = saved - step;
    const double down = f(point);
    point[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw InputError("non-finite function value at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace foi::losses
