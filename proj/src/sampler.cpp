#include "darn/sampler.hpp"

#include "darn/math.hpp"

namespace darn {
namespace {

inline void count(MultiplyCounter* counter, std::uint64_t macs) {
  if (counter) counter->macs += macs;
}

// Samples one layer of conditionally Bernoulli units given the premixed
// cross-context logits, adding the within-layer autoregressive term unit by
// unit as earlier bits become available.
void sample_units(const Eigen::VectorXd& base, const Eigen::MatrixXd& within, RandomStream& rng,
                  Eigen::VectorXd& bits, Eigen::VectorXd& probs, MultiplyCounter* counter) {
  const Eigen::Index n = base.size();
  bits.resize(n);
  probs.resize(n);
  const bool autoregressive = within.size() > 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double z = base[j];
    if (autoregressive && j > 0) {
      z += within.row(j).head(j).dot(bits.head(j));
      count(counter, static_cast<std::uint64_t>(j));
    }
    const double p = clamp_prob(sigmoid(z));
    probs[j] = p;
    bits[j] = rng.bernoulli(p) ? 1.0 : 0.0;
  }
}

Eigen::VectorXd affine(const Eigen::MatrixXd& weights, const Eigen::VectorXd& input,
                       const Eigen::VectorXd& bias, MultiplyCounter* counter) {
  count(counter, static_cast<std::uint64_t>(weights.rows()) *
                     static_cast<std::uint64_t>(weights.cols()));
  return bias + weights * input;
}

Eigen::VectorXd tanh_features(const Eigen::MatrixXd& det, const Eigen::VectorXd& input,
                              MultiplyCounter* counter) {
  count(counter, static_cast<std::uint64_t>(det.rows()) * static_cast<std::uint64_t>(det.cols()));
  return (det * input).array().tanh();
}

}  // namespace

DecoderSample sample_decoder(const ModelParams& params, RandomStream& rng,
                             MultiplyCounter* counter) {
  const Architecture& a = params.arch;
  const int top = a.num_layers() - 1;
  DecoderSample out;
  out.rep.layers.resize(a.num_layers());

  // Deepest layer: autoregressive prior, no context from above.
  sample_units(params.layers[top].dec_bias, params.layers[top].dec_within, rng,
               out.rep.layers[top].bits, out.rep.layers[top].probs, counter);

  for (int i = top - 1; i >= 0; --i) {
    const Eigen::VectorXd& above = out.rep.layers[i + 1].bits;
    const Eigen::VectorXd feat = a.layers[i + 1].det_width > 0
                                     ? tanh_features(params.layers[i + 1].det_dec, above, counter)
                                     : above;
    const Eigen::VectorXd base =
        affine(params.layers[i].dec_cross, feat, params.layers[i].dec_bias, counter);
    sample_units(base, params.layers[i].dec_within, rng, out.rep.layers[i].bits,
                 out.rep.layers[i].probs, counter);
  }

  const Eigen::VectorXd& h0 = out.rep.layers[0].bits;
  const Eigen::VectorXd feat =
      a.layers[0].det_width > 0 ? tanh_features(params.layers[0].det_dec, h0, counter) : h0;
  const Eigen::VectorXd base = affine(params.visible.cross, feat, params.visible.bias, counter);
  sample_units(base, params.visible.within, rng, out.x, out.visible_probs, counter);
  return out;
}

Representation sample_encoder(const ModelParams& params, const Eigen::VectorXd& x,
                              RandomStream& rng, MultiplyCounter* counter) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  Representation rep;
  rep.layers.resize(a.num_layers());
  for (int i = 0; i < a.num_layers(); ++i) {
    const Eigen::VectorXd& below = i == 0 ? x : rep.layers[i - 1].bits;
    const Eigen::VectorXd feat = a.layers[i].det_width > 0
                                     ? tanh_features(params.layers[i].det_enc, below, counter)
                                     : below;
    const Eigen::VectorXd base =
        affine(params.layers[i].enc_cross, feat, params.layers[i].enc_bias, counter);
    sample_units(base, params.layers[i].enc_within, rng, rep.layers[i].bits, rep.layers[i].probs,
                 counter);
  }
  return rep;
}

std::uint64_t count_multiplications(const Architecture& arch) {
  arch.validate();
  auto triangle = [](std::uint64_t n) { return n * (n - 1) / 2; };
  const int top = arch.num_layers() - 1;
  std::uint64_t total = 0;
  if (arch.layers[top].decoder_autoregressive)
    total += triangle(static_cast<std::uint64_t>(arch.layers[top].n_h));
  for (int i = top - 1; i >= 0; --i) {
    const auto& above = arch.layers[i + 1];
    const std::uint64_t n = arch.layers[i].n_h;
    if (above.det_width > 0) {
      total += static_cast<std::uint64_t>(above.det_width) * above.n_h;  // tanh transform
      total += n * static_cast<std::uint64_t>(above.det_width);         // cross logits
    } else {
      total += n * static_cast<std::uint64_t>(above.n_h);
    }
    if (arch.layers[i].decoder_autoregressive) total += triangle(n);
  }
  const auto& bottom = arch.layers[0];
  const std::uint64_t n_x = arch.n_x;
  if (bottom.det_width > 0) {
    total += static_cast<std::uint64_t>(bottom.det_width) * bottom.n_h;
    total += n_x * static_cast<std::uint64_t>(bottom.det_width);
  } else {
    total += n_x * static_cast<std::uint64_t>(bottom.n_h);
  }
  if (arch.visible_autoregressive) total += triangle(n_x);
  return total;
}

}  // namespace darn
