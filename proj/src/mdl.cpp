#include "darn/mdl.hpp"

#include <cmath>

#include "darn/enumeration.hpp"
#include "darn/sampler.hpp"

namespace darn {

DescriptionLength description_length_terms(const ModelParams& params, const Eigen::VectorXd& x,
                                           const Representation& rep) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  validate_representation(params, rep, /*require_probs=*/false);

  DescriptionLength out;
  out.residual = -visible_log_prob(params, x, rep.layers[0].bits);
  const int top = a.num_layers() - 1;
  double hidden_code = prior_log_prob(params, rep.layers[top].bits);
  for (int i = top - 1; i >= 0; --i)
    hidden_code += layer_cond_log_prob(params, i, rep.layers[i].bits, rep.layers[i + 1].bits,
                                       Side::decoder);
  out.prior_cost = -hidden_code;
  out.bits_back = encoder_log_prob(params, x, rep);
  out.total = out.residual + out.prior_cost + out.bits_back;
  return out;
}

double free_energy_exact(const ModelParams& params, const Eigen::VectorXd& x) {
  if (params.arch.total_hidden() > kEnumerationGuardBits)
    throw EnumerationGuardError("free_energy_exact: " +
                                std::to_string(params.arch.total_hidden()) +
                                " stochastic bits exceed the enumeration guard of " +
                                std::to_string(kEnumerationGuardBits));
  double total = 0.0;
  RepresentationEnumerator e(params, x);
  e.enumerate([&](const std::vector<Eigen::VectorXd>&, double log_q, double log_p) {
    total += std::exp(log_q) * (log_q - log_p);
  });
  return total;
}

double free_energy_mc(const ModelParams& params, const Eigen::VectorXd& x, int n_samples,
                      RandomStream& rng) {
  if (n_samples < 1) throw UsageError("free_energy_mc: n_samples must be >= 1");
  double total = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Representation rep = sample_encoder(params, x, rng);
    total += description_length_terms(params, x, rep).total;
  }
  return total / n_samples;
}

}  // namespace darn
