#pragma once

#include <algorithm>
#include <cmath>

namespace darn {

// Bernoulli probabilities are clamped to [kProbEps, 1-kProbEps] before any
// logarithm, so costs and importance weights stay finite under saturated
// logits. Complementary probabilities clamp symmetrically, which keeps
// P(bit=1) + P(bit=0) = 1 exactly.
inline constexpr double kProbEps = 1e-7;

inline const double kLogProbMin = std::log(kProbEps);
inline const double kLogProbMax = std::log1p(-kProbEps);

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double clamp_prob(double p) {
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

// ln sigma(z), stable for large |z|.
inline double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

// ln of the clamped probability of `bit` under logit z.
inline double bernoulli_log_prob(bool bit, double z) {
  const double v = log_sigmoid(bit ? z : -z);
  return std::clamp(v, kLogProbMin, kLogProbMax);
}

// d/dz of bernoulli_log_prob: (bit - sigma(z)) inside the clamp range, 0 in
// the saturated region where the clamped cost is locally flat.
inline double bernoulli_log_prob_dz(bool bit, double z) {
  const double p = sigmoid(z);
  if (p <= kProbEps || p >= 1.0 - kProbEps) return 0.0;
  return (bit ? 1.0 : 0.0) - p;
}

// Clamped log-odds ln(p / (1-p)); equals the logit when unsaturated.
inline double clamped_logit(double p_clamped) {
  return std::log(p_clamped) - std::log1p(-p_clamped);
}

}  // namespace darn
