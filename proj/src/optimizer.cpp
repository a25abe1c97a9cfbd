#include "darn/optimizer.hpp"

namespace darn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("momentum must be in [0, 1)");
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) throw UsageError("rms_decay must be in [0, 1)");
  if (!(rms_epsilon >= 0.0)) throw UsageError("rms_epsilon must be >= 0");
  if (minibatch < 1) throw UsageError("minibatch must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (early_stop_patience < 0) throw UsageError("early_stop_patience must be >= 0");
  if (threads < 1) throw UsageError("threads must be >= 1");
  if (!(init_scale >= 0.0)) throw UsageError("init_scale must be >= 0");
  if (val_mc_samples < 1) throw UsageError("val_mc_samples must be >= 1");
}

RmsPropState make_rmsprop_state(const Architecture& arch) {
  return RmsPropState{zeros_like(arch), zeros_like(arch)};
}

void rmsprop_step(ModelParams& params, RmsPropState& state, const GradientSet& grads,
                  const TrainConfig& cfg) {
  std::vector<BlockView> p = block_views(params);
  std::vector<BlockView> ms = block_views(state.mean_sq);
  std::vector<BlockView> st = block_views(state.step);
  std::vector<BlockView> g = block_views(const_cast<GradientSet&>(grads));
  if (p.size() != g.size() || p.size() != ms.size() || p.size() != st.size())
    throw DimensionError("rmsprop_step: block count mismatch");

  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].rows != g[k].rows || p[k].cols != g[k].cols)
      throw DimensionError("rmsprop_step: block '" + p[k].name + "' shape mismatch");
    auto gm = g[k].mat();
    if (!gm.allFinite())
      throw NumericError("non-finite gradient in block '" + p[k].name + "'");
    auto pm = p[k].mat();
    auto msm = ms[k].mat();
    auto stm = st[k].mat();
    msm.array() = cfg.rms_decay * msm.array() + (1.0 - cfg.rms_decay) * gm.array().square();
    stm.array() = cfg.momentum * stm.array() -
                  cfg.learning_rate * gm.array() / (msm.array() + cfg.rms_epsilon).sqrt();
    pm += stm;
  }
}

}  // namespace darn
