#pragma once

#include "darn/model.hpp"
#include "darn/rng.hpp"

namespace darn {

// Three-way split of the per-sample description length, in nats.
// total = residual + prior_cost + bits_back always holds exactly; the costs
// of intermediate stochastic layers are folded into prior_cost (the "prior"
// on a representation is the whole decoder chain above the visibles).
struct DescriptionLength {
  double residual = 0.0;    // -ln p(x|h), >= 0
  double prior_cost = 0.0;  // -ln p(h),   >= 0
  double bits_back = 0.0;   // +ln q(h|x), <= 0
  double total = 0.0;
};

DescriptionLength description_length_terms(const ModelParams& params, const Eigen::VectorXd& x,
                                           const Representation& rep);

// Exact expected description length sum_h q(h|x) (ln q(h|x) - ln p(x,h)),
// enumerated over all representations. Guarded to <= 20 stochastic bits.
double free_energy_exact(const ModelParams& params, const Eigen::VectorXd& x);

// Monte Carlo estimate of the same quantity: mean description length over
// n_samples encoder draws.
double free_energy_mc(const ModelParams& params, const Eigen::VectorXd& x, int n_samples,
                      RandomStream& rng);

inline constexpr int kEnumerationGuardBits = 20;

}  // namespace darn
