#pragma once

#include <cstdint>

#include "darn/params.hpp"

namespace darn {

struct TrainConfig {
  double learning_rate = 2.5e-4;
  double momentum = 0.9;
  double rms_decay = 0.95;
  double rms_epsilon = 1e-4;
  int minibatch = 100;
  int epochs = 50;
  std::uint64_t seed = 0;
  int early_stop_patience = 0;  // 0 = train to the last epoch
  // Plumbing beyond the core recipe:
  int threads = 1;           // worker cap for per-datum passes
  double init_scale = 0.05;  // uniform weight init range
  int val_mc_samples = 5;    // encoder draws per validation datum

  void validate() const;
};

// RMSprop with momentum applied to the rescaled step:
//   mean_sq <- rms_decay * mean_sq + (1 - rms_decay) * g^2
//   step    <- momentum * step - learning_rate * g / sqrt(mean_sq + rms_epsilon)
//   param   <- param + step
struct RmsPropState {
  GradientSet mean_sq;
  GradientSet step;
};

RmsPropState make_rmsprop_state(const Architecture& arch);

// Applies one update in place. Throws NumericError (naming the offending
// block) when the gradient contains non-finite values.
void rmsprop_step(ModelParams& params, RmsPropState& state, const GradientSet& grads,
                  const TrainConfig& cfg);

}  // namespace darn
