#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "darn/params.hpp"

namespace darn {

enum class Side { encoder, decoder };

Side parse_side(const std::string& name);  // "encoder" / "decoder"

// Sampled binary activations per stochastic layer, with the Bernoulli
// success probability each bit was drawn from (clamped, in (0,1)).
struct Representation {
  struct Layer {
    Eigen::VectorXd bits;
    Eigen::VectorXd probs;
  };
  std::vector<Layer> layers;
};

void validate_bits(const Eigen::VectorXd& bits, Eigen::Index expected, const std::string& what);
void validate_representation(const ModelParams& params, const Representation& rep,
                             bool require_probs);

// Per-unit logits of layer i's conditionals given all of its bits and the
// adjacent layer's bits (decoder: layer above, empty for the deepest;
// encoder: layer below, x for layer 0). Within-layer terms use the masked
// square matrices, so unit j only sees bits 1..j-1.
Eigen::VectorXd layer_logits(const ModelParams& params, int layer, const Eigen::VectorXd& bits,
                             const Eigen::VectorXd& context, Side side);

// Per-unit logits of the visible conditionals given x (for the
// autoregressive part) and the bits of layer 0.
Eigen::VectorXd visible_logits(const ModelParams& params, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& h0);

// ln p(h) of the deepest layer under the autoregressive prior, in nats.
double prior_log_prob(const ModelParams& params, const Eigen::VectorXd& h_top);

// ln of layer i's conditional probability of `bits` given `context`, in nats.
double layer_cond_log_prob(const ModelParams& params, int layer, const Eigen::VectorXd& bits,
                           const Eigen::VectorXd& context, Side side);

// ln p(x | h^(0)), in nats.
double visible_log_prob(const ModelParams& params, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& h0);

// ln p(x, h) = prior + intermediate decoder conditionals + visible
// conditional, in nats.
double joint_log_prob(const ModelParams& params, const Eigen::VectorXd& x,
                      const Representation& rep);

// ln q(h | x), bottom-up over the encoder chain, in nats.
double encoder_log_prob(const ModelParams& params, const Eigen::VectorXd& x,
                        const Representation& rep);

// Encoder conditional probabilities for given bits (clamped), layer by
// layer; used to attach probs to externally chosen bit patterns.
Representation representation_from_bits(const ModelParams& params, const Eigen::VectorXd& x,
                                        const std::vector<Eigen::VectorXd>& bits);

}  // namespace darn
