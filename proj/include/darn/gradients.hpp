#pragma once

#include "darn/math.hpp"
#include "darn/mdl.hpp"
#include "darn/model.hpp"

namespace darn {

// Gradient of the stochastic-unit estimator with respect to the unit's
// encoder logit, given the full derivative of the downstream cost with
// respect to the sampled bit value. Backpropagation through a sampled bit
// re-weights the bit gradient by dq(H=1)/dz / (2 q(sampled value)); the
// factor is zero in the clamped (saturated) region, where the sampling
// probability is locally constant.
inline double stochastic_unit_logit_grad(double df_dh, double z_enc, bool bit) {
  const double p = sigmoid(z_enc);
  if (p <= kProbEps || p >= 1.0 - kProbEps) return 0.0;
  const double sampled = bit ? p : 1.0 - p;
  return df_dh * p * (1.0 - p) / (2.0 * sampled);
}

// Single-sample stochastic gradient of description_length_terms(...).total
// with respect to every parameter block. Deterministic paths (weights,
// biases, tanh layers, the ln q and ln p terms at fixed bits) are exact;
// each sampled bit applies the re-weighted backpropagation rule above,
// independently at every stochastic unit crossed.
GradientSet backward(const ModelParams& params, const Eigen::VectorXd& x,
                     const Representation& rep);

struct SampleGradient {
  GradientSet grads;
  DescriptionLength cost;
};
SampleGradient backward_sample(const ModelParams& params, const Eigen::VectorXd& x,
                               const Representation& rep);

// Gradients of ln q(h|x) and ln p(x,h) at fixed bits (deterministic paths
// only). ln q touches encoder blocks only, ln p decoder blocks only.
struct LogProbGrads {
  GradientSet d_log_q;
  GradientSet d_log_p;
};
LogProbGrads log_prob_grads(const ModelParams& params, const Eigen::VectorXd& x,
                            const std::vector<Eigen::VectorXd>& bits);

// Analytic gradient of the enumerated free energy:
//   sum_h q(h|x) [ (1 + F(h)) grad ln q - grad ln p ],  F = ln q - ln p.
// Guarded like free_energy_exact.
GradientSet free_energy_exact_grad(const ModelParams& params, const Eigen::VectorXd& x);

// Central finite differences of free_energy_exact over every unmasked
// parameter entry. Guarded to <= 12 stochastic bits.
GradientSet finite_diff_grad(const ModelParams& params, const Eigen::VectorXd& x, double epsilon);

inline constexpr int kFiniteDiffGuardBits = 12;

// Block-wise helpers shared by the optimizer, training loop and tests.
void gs_fill(GradientSet& g, double value);
void gs_axpy(GradientSet& acc, double a, const GradientSet& g);  // acc += a * g
void gs_scale(GradientSet& g, double a);

}  // namespace darn
