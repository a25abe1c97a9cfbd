#pragma once

#include <cstdint>

#include "darn/model.hpp"
#include "darn/rng.hpp"

namespace darn {

// Counts scalar multiply-accumulates actually performed by a sampling pass.
// Masked/absent autoregressive entries are never touched, so they are never
// counted.
struct MultiplyCounter {
  std::uint64_t macs = 0;
};

struct DecoderSample {
  Eigen::VectorXd x;
  Representation rep;
  Eigen::VectorXd visible_probs;  // clamped Bernoulli probabilities of x
};

// Ancestral sampling through the decoder: deepest layer unit by unit under
// the autoregressive prior, then each lower layer, ending with the visibles.
DecoderSample sample_decoder(const ModelParams& params, RandomStream& rng,
                             MultiplyCounter* counter = nullptr);

// Ancestral sampling through the encoder, bottom-up, conditioned on x.
Representation sample_encoder(const ModelParams& params, const Eigen::VectorXd& x,
                              RandomStream& rng, MultiplyCounter* counter = nullptr);

// Exact number of scalar multiply-accumulates one sample_decoder call
// performs, computed analytically from the architecture.
std::uint64_t count_multiplications(const Architecture& arch);

}  // namespace darn
