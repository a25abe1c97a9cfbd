#include "darn/model.hpp"

#include "darn/math.hpp"

namespace darn {

Side parse_side(const std::string& name) {
  if (name == "encoder") return Side::encoder;
  if (name == "decoder") return Side::decoder;
  throw UsageError("unknown side '" + name + "' (expected 'encoder' or 'decoder')");
}

void validate_bits(const Eigen::VectorXd& bits, Eigen::Index expected, const std::string& what) {
  if (bits.size() != expected)
    throw DimensionError(what + ": expected length " + std::to_string(expected) + ", got " +
                         std::to_string(bits.size()));
  for (Eigen::Index j = 0; j < bits.size(); ++j)
    if (bits[j] != 0.0 && bits[j] != 1.0)
      throw DimensionError(what + ": entry " + std::to_string(j) + " is not binary");
}

void validate_representation(const ModelParams& params, const Representation& rep,
                             bool require_probs) {
  const Architecture& a = params.arch;
  if (static_cast<int>(rep.layers.size()) != a.num_layers())
    throw DimensionError("representation has " + std::to_string(rep.layers.size()) +
                         " layers, architecture has " + std::to_string(a.num_layers()));
  for (int i = 0; i < a.num_layers(); ++i) {
    validate_bits(rep.layers[i].bits, a.layers[i].n_h, "representation layer " + std::to_string(i));
    if (require_probs) {
      const Eigen::VectorXd& q = rep.layers[i].probs;
      if (q.size() != a.layers[i].n_h)
        throw DimensionError("representation layer " + std::to_string(i) +
                             ": probs missing or wrong length");
      for (Eigen::Index j = 0; j < q.size(); ++j)
        if (!(q[j] > 0.0 && q[j] < 1.0))
          throw DimensionError("representation layer " + std::to_string(i) +
                               ": prob outside (0,1)");
    }
  }
}

namespace {

// Transformed context feeding layer i's conditionals on `side`.
Eigen::VectorXd context_features(const ModelParams& params, int layer,
                                 const Eigen::VectorXd& context, Side side) {
  const Architecture& a = params.arch;
  if (side == Side::encoder) {
    if (context.size() != a.below_width(layer))
      throw DimensionError("encoder context for layer " + std::to_string(layer) +
                           ": expected length " + std::to_string(a.below_width(layer)) +
                           ", got " + std::to_string(context.size()));
    if (a.layers[layer].det_width > 0)
      return (params.layers[layer].det_enc * context).array().tanh();
    return context;
  }
  // Decoder side: context comes from the layer above; its det transform
  // belongs to that layer.
  if (layer + 1 >= a.num_layers()) {
    if (context.size() != 0)
      throw DimensionError("deepest layer takes no decoder context");
    return Eigen::VectorXd(0);
  }
  const auto& above = a.layers[layer + 1];
  if (context.size() != above.n_h)
    throw DimensionError("decoder context for layer " + std::to_string(layer) +
                         ": expected length " + std::to_string(above.n_h) + ", got " +
                         std::to_string(context.size()));
  if (above.det_width > 0)
    return (params.layers[layer + 1].det_dec * context).array().tanh();
  return context;
}

double sum_log_probs(const Eigen::VectorXd& bits, const Eigen::VectorXd& logits) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < bits.size(); ++j)
    total += bernoulli_log_prob(bits[j] != 0.0, logits[j]);
  return total;
}

}  // namespace

Eigen::VectorXd layer_logits(const ModelParams& params, int layer, const Eigen::VectorXd& bits,
                             const Eigen::VectorXd& context, Side side) {
  const Architecture& a = params.arch;
  if (layer < 0 || layer >= a.num_layers())
    throw DimensionError("layer index " + std::to_string(layer) + " out of range");
  const auto& spec = a.layers[layer];
  validate_bits(bits, spec.n_h, "layer " + std::to_string(layer) + " bits");
  const LayerParams& L = params.layers[layer];
  const Eigen::VectorXd feat = context_features(params, layer, context, side);

  Eigen::VectorXd z;
  if (side == Side::encoder) {
    z = L.enc_bias;
    if (feat.size() > 0) z += L.enc_cross * feat;
    if (spec.encoder_autoregressive) z += L.enc_within * bits;
  } else {
    z = L.dec_bias;
    if (feat.size() > 0) z += L.dec_cross * feat;
    if (spec.decoder_autoregressive) z += L.dec_within * bits;
  }
  return z;
}

Eigen::VectorXd visible_logits(const ModelParams& params, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& h0) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  validate_bits(h0, a.layers[0].n_h, "layer 0 bits");
  Eigen::VectorXd feat = a.layers[0].det_width > 0
                             ? Eigen::VectorXd((params.layers[0].det_dec * h0).array().tanh())
                             : h0;
  Eigen::VectorXd z = params.visible.bias + params.visible.cross * feat;
  if (a.visible_autoregressive) z += params.visible.within * x;
  return z;
}

double prior_log_prob(const ModelParams& params, const Eigen::VectorXd& h_top) {
  const int top = params.arch.num_layers() - 1;
  return layer_cond_log_prob(params, top, h_top, Eigen::VectorXd(0), Side::decoder);
}

double layer_cond_log_prob(const ModelParams& params, int layer, const Eigen::VectorXd& bits,
                           const Eigen::VectorXd& context, Side side) {
  return sum_log_probs(bits, layer_logits(params, layer, bits, context, side));
}

double visible_log_prob(const ModelParams& params, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& h0) {
  return sum_log_probs(x, visible_logits(params, x, h0));
}

double joint_log_prob(const ModelParams& params, const Eigen::VectorXd& x,
                      const Representation& rep) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  validate_representation(params, rep, /*require_probs=*/false);
  const int top = a.num_layers() - 1;
  double total = prior_log_prob(params, rep.layers[top].bits);
  for (int i = top - 1; i >= 0; --i)
    total += layer_cond_log_prob(params, i, rep.layers[i].bits, rep.layers[i + 1].bits,
                                 Side::decoder);
  total += visible_log_prob(params, x, rep.layers[0].bits);
  return total;
}

double encoder_log_prob(const ModelParams& params, const Eigen::VectorXd& x,
                        const Representation& rep) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  validate_representation(params, rep, /*require_probs=*/false);
  double total = 0.0;
  for (int i = 0; i < a.num_layers(); ++i) {
    const Eigen::VectorXd& below = i == 0 ? x : rep.layers[i - 1].bits;
    total += layer_cond_log_prob(params, i, rep.layers[i].bits, below, Side::encoder);
  }
  return total;
}

Representation representation_from_bits(const ModelParams& params, const Eigen::VectorXd& x,
                                        const std::vector<Eigen::VectorXd>& bits) {
  const Architecture& a = params.arch;
  if (static_cast<int>(bits.size()) != a.num_layers())
    throw DimensionError("representation_from_bits: wrong layer count");
  Representation rep;
  rep.layers.resize(a.num_layers());
  for (int i = 0; i < a.num_layers(); ++i) {
    const Eigen::VectorXd& below = i == 0 ? x : bits[i - 1];
    Eigen::VectorXd z = layer_logits(params, i, bits[i], below, Side::encoder);
    rep.layers[i].bits = bits[i];
    rep.layers[i].probs = z.unaryExpr([](double v) { return clamp_prob(sigmoid(v)); });
  }
  return rep;
}

}  // namespace darn
