#include "darn/gradients.hpp"

#include <cmath>

#include "darn/enumeration.hpp"

namespace darn {
namespace {

struct ForwardTrace {
  std::vector<Eigen::VectorXd> enc_ctx;   // raw encoder context per layer
  std::vector<Eigen::VectorXd> enc_feat;  // tanh(det_enc * ctx) or ctx
  std::vector<Eigen::VectorXd> z_enc;
  std::vector<Eigen::VectorXd> q;         // clamped
  std::vector<Eigen::VectorXd> dec_feat;  // tanh(det_dec * bits) or bits, per layer
  std::vector<Eigen::VectorXd> z_dec;
  std::vector<Eigen::VectorXd> p;         // clamped
  Eigen::VectorXd z_vis, p_vis;
};

Eigen::VectorXd clamped_sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return clamp_prob(sigmoid(v)); });
}

ForwardTrace forward_trace(const ModelParams& params, const Eigen::VectorXd& x,
                           const std::vector<Eigen::VectorXd>& bits) {
  const Architecture& a = params.arch;
  const int L = a.num_layers();
  ForwardTrace t;
  t.enc_ctx.resize(L);
  t.enc_feat.resize(L);
  t.z_enc.resize(L);
  t.q.resize(L);
  t.dec_feat.resize(L);
  t.z_dec.resize(L);
  t.p.resize(L);

  for (int i = 0; i < L; ++i) {
    const LayerParams& P = params.layers[i];
    t.enc_ctx[i] = i == 0 ? x : bits[i - 1];
    t.enc_feat[i] = a.layers[i].det_width > 0
                        ? Eigen::VectorXd((P.det_enc * t.enc_ctx[i]).array().tanh())
                        : t.enc_ctx[i];
    t.z_enc[i] = P.enc_bias + P.enc_cross * t.enc_feat[i];
    if (a.layers[i].encoder_autoregressive) t.z_enc[i] += P.enc_within * bits[i];
    t.q[i] = clamped_sigmoid(t.z_enc[i]);

    t.dec_feat[i] = a.layers[i].det_width > 0
                        ? Eigen::VectorXd((P.det_dec * bits[i]).array().tanh())
                        : bits[i];
  }
  for (int i = 0; i < L; ++i) {
    const LayerParams& P = params.layers[i];
    t.z_dec[i] = P.dec_bias;
    if (i + 1 < L) t.z_dec[i] += P.dec_cross * t.dec_feat[i + 1];
    if (a.layers[i].decoder_autoregressive) t.z_dec[i] += P.dec_within * bits[i];
    t.p[i] = clamped_sigmoid(t.z_dec[i]);
  }
  t.z_vis = params.visible.bias + params.visible.cross * t.dec_feat[0];
  if (a.visible_autoregressive) t.z_vis += params.visible.within * x;
  t.p_vis = clamped_sigmoid(t.z_vis);
  return t;
}

Eigen::VectorXd logit_cost_grad(const Eigen::VectorXd& bits, const Eigen::VectorXd& z) {
  Eigen::VectorXd g(bits.size());
  for (Eigen::Index j = 0; j < bits.size(); ++j)
    g[j] = bernoulli_log_prob_dz(bits[j] != 0.0, z[j]);
  return g;
}

// Gradient wrt the raw context of an affine-through-optional-tanh map, and
// accumulation of the det-transform's own parameter gradient.
Eigen::VectorXd back_through_features(const Eigen::MatrixXd& cross, const Eigen::VectorXd& g_z,
                                      const Eigen::MatrixXd& det, const Eigen::VectorXd& feat,
                                      const Eigen::VectorXd& raw_ctx, Eigen::MatrixXd* det_grad) {
  Eigen::VectorXd g_feat = cross.transpose() * g_z;
  if (det.size() == 0) return g_feat;
  Eigen::VectorXd g_pre = (1.0 - feat.array().square()).matrix().cwiseProduct(g_feat);
  if (det_grad) det_grad->noalias() += g_pre * raw_ctx.transpose();
  return det.transpose() * g_pre;
}

void mask_within_blocks(GradientSet& g) {
  apply_masks(g);
}

}  // namespace

void gs_fill(GradientSet& g, double value) {
  for (BlockView& b : block_views(g)) b.mat().setConstant(value);
}

void gs_axpy(GradientSet& acc, double a, const GradientSet& g) {
  std::vector<BlockView> dst = block_views(acc);
  std::vector<BlockView> src = block_views(const_cast<GradientSet&>(g));
  if (dst.size() != src.size()) throw DimensionError("gs_axpy: block count mismatch");
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k].mat() += a * src[k].mat();
}

void gs_scale(GradientSet& g, double a) {
  for (BlockView& b : block_views(g)) b.mat() *= a;
}

LogProbGrads log_prob_grads(const ModelParams& params, const Eigen::VectorXd& x,
                            const std::vector<Eigen::VectorXd>& bits) {
  const Architecture& a = params.arch;
  const int L = a.num_layers();
  const ForwardTrace t = forward_trace(params, x, bits);

  LogProbGrads out{zeros_like(a), zeros_like(a)};
  for (int i = 0; i < L; ++i) {
    const LayerParams& P = params.layers[i];
    LayerParams& Gq = out.d_log_q.layers[i];
    LayerParams& Gp = out.d_log_p.layers[i];

    const Eigen::VectorXd ge = logit_cost_grad(bits[i], t.z_enc[i]);
    Gq.enc_bias += ge;
    Gq.enc_cross.noalias() += ge * t.enc_feat[i].transpose();
    if (a.layers[i].encoder_autoregressive) Gq.enc_within.noalias() += ge * bits[i].transpose();
    if (a.layers[i].det_width > 0)
      back_through_features(P.enc_cross, ge, P.det_enc, t.enc_feat[i], t.enc_ctx[i], &Gq.det_enc);

    const Eigen::VectorXd gd = logit_cost_grad(bits[i], t.z_dec[i]);
    Gp.dec_bias += gd;
    if (i + 1 < L) {
      Gp.dec_cross.noalias() += gd * t.dec_feat[i + 1].transpose();
      back_through_features(P.dec_cross, gd, params.layers[i + 1].det_dec, t.dec_feat[i + 1],
                            bits[i + 1], &out.d_log_p.layers[i + 1].det_dec);
    }
    if (a.layers[i].decoder_autoregressive) Gp.dec_within.noalias() += gd * bits[i].transpose();
  }
  const Eigen::VectorXd gv = logit_cost_grad(x, t.z_vis);
  out.d_log_p.visible.bias += gv;
  out.d_log_p.visible.cross.noalias() += gv * t.dec_feat[0].transpose();
  if (a.visible_autoregressive) out.d_log_p.visible.within.noalias() += gv * x.transpose();
  back_through_features(params.visible.cross, gv, params.layers[0].det_dec, t.dec_feat[0],
                        bits[0], &out.d_log_p.layers[0].det_dec);

  mask_within_blocks(out.d_log_q);
  mask_within_blocks(out.d_log_p);
  return out;
}

SampleGradient backward_sample(const ModelParams& params, const Eigen::VectorXd& x,
                               const Representation& rep) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  validate_representation(params, rep, /*require_probs=*/true);
  const int L = a.num_layers();

  std::vector<Eigen::VectorXd> bits(L);
  for (int i = 0; i < L; ++i) bits[i] = rep.layers[i].bits;
  const ForwardTrace t = forward_trace(params, x, bits);

  // Cost is the per-sample description length F = ln q(h|x) - ln p(x,h).
  // Analytic logit gradients at fixed bits:
  std::vector<Eigen::VectorXd> dz_enc(L), dz_dec(L);
  for (int i = 0; i < L; ++i) {
    dz_enc[i] = logit_cost_grad(bits[i], t.z_enc[i]);          // from +ln q
    dz_dec[i] = -logit_cost_grad(bits[i], t.z_dec[i]);         // from -ln p
  }
  const Eigen::VectorXd dz_vis = -logit_cost_grad(x, t.z_vis);  // from -ln p

  // Value gradients dF/dh per unit. Base contributions that do not depend
  // on processing order: the unit's own cost terms and the decoder cost of
  // the layer below (whose logits carry no injections).
  std::vector<Eigen::VectorXd> gH(L);
  for (int i = 0; i < L; ++i) {
    gH[i] = Eigen::VectorXd::Zero(a.layers[i].n_h);
    for (Eigen::Index j = 0; j < gH[i].size(); ++j)
      gH[i][j] = clamped_logit(t.q[i][j]) - clamped_logit(t.p[i][j]);
  }
  GradientSet G = zeros_like(a);
  {
    // Visible cost -> layer 0 bits (and det_dec of layer 0).
    gH[0] += back_through_features(params.visible.cross, dz_vis, params.layers[0].det_dec,
                                   t.dec_feat[0], bits[0], &G.layers[0].det_dec);
    G.visible.bias += dz_vis;
    G.visible.cross.noalias() += dz_vis * t.dec_feat[0].transpose();
    if (a.visible_autoregressive) G.visible.within.noalias() += dz_vis * x.transpose();
  }
  for (int i = 1; i < L; ++i) {
    // Decoder cost of layer i-1 -> layer i bits (and det_dec of layer i).
    gH[i] += back_through_features(params.layers[i - 1].dec_cross, dz_dec[i - 1],
                                   params.layers[i].det_dec, t.dec_feat[i], bits[i],
                                   &G.layers[i].det_dec);
  }

  // Top-down: finalize value gradients, apply the stochastic-unit rule, and
  // accumulate parameter gradients.
  std::vector<Eigen::VectorXd> tg_enc(L);
  for (int i = L - 1; i >= 0; --i) {
    const LayerParams& P = params.layers[i];
    const int n = a.layers[i].n_h;
    if (i + 1 < L) {
      // Encoder cost of layer i+1 (injections included) -> layer i bits.
      gH[i] += back_through_features(params.layers[i + 1].enc_cross, tg_enc[i + 1],
                                     params.layers[i + 1].det_enc, t.enc_feat[i + 1],
                                     t.enc_ctx[i + 1], &G.layers[i + 1].det_enc);
    }
    tg_enc[i] = dz_enc[i];
    for (int v = n - 1; v >= 0; --v) {
      tg_enc[i][v] += stochastic_unit_logit_grad(gH[i][v], t.z_enc[i][v], bits[i][v] != 0.0);
      if (v > 0) {
        if (a.layers[i].encoder_autoregressive)
          gH[i].head(v) += tg_enc[i][v] * P.enc_within.row(v).head(v).transpose();
        if (a.layers[i].decoder_autoregressive)
          gH[i].head(v) += dz_dec[i][v] * P.dec_within.row(v).head(v).transpose();
      }
    }

    LayerParams& GL = G.layers[i];
    GL.enc_bias += tg_enc[i];
    GL.enc_cross.noalias() += tg_enc[i] * t.enc_feat[i].transpose();
    if (a.layers[i].encoder_autoregressive)
      GL.enc_within.noalias() += tg_enc[i] * bits[i].transpose();
    if (a.layers[i].det_width > 0 && i == 0) {
      // Layer 0's encoder context is x: parameter gradient only, no bit flow.
      back_through_features(P.enc_cross, tg_enc[0], P.det_enc, t.enc_feat[0], t.enc_ctx[0],
                            &GL.det_enc);
    }
    GL.dec_bias += dz_dec[i];
    if (i + 1 < L) GL.dec_cross.noalias() += dz_dec[i] * t.dec_feat[i + 1].transpose();
    // (det_dec gradients of the layer above were accumulated with the value
    // flow in the base-contribution loop.)
    if (a.layers[i].decoder_autoregressive)
      GL.dec_within.noalias() += dz_dec[i] * bits[i].transpose();
  }
  mask_within_blocks(G);

  SampleGradient out{std::move(G), DescriptionLength{}};
  double log_q = 0.0, hidden_log_p = 0.0, vis_log_p = 0.0;
  for (int i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < bits[i].size(); ++j) {
      log_q += bernoulli_log_prob(bits[i][j] != 0.0, t.z_enc[i][j]);
      hidden_log_p += bernoulli_log_prob(bits[i][j] != 0.0, t.z_dec[i][j]);
    }
  }
  for (Eigen::Index j = 0; j < x.size(); ++j)
    vis_log_p += bernoulli_log_prob(x[j] != 0.0, t.z_vis[j]);
  out.cost.residual = -vis_log_p;
  out.cost.prior_cost = -hidden_log_p;
  out.cost.bits_back = log_q;
  out.cost.total = out.cost.residual + out.cost.prior_cost + out.cost.bits_back;
  return out;
}

GradientSet backward(const ModelParams& params, const Eigen::VectorXd& x,
                     const Representation& rep) {
  return backward_sample(params, x, rep).grads;
}

GradientSet free_energy_exact_grad(const ModelParams& params, const Eigen::VectorXd& x) {
  if (params.arch.total_hidden() > kEnumerationGuardBits)
    throw EnumerationGuardError("free_energy_exact_grad: enumeration guard exceeded");
  GradientSet acc = zeros_like(params.arch);
  RepresentationEnumerator e(params, x);
  e.enumerate([&](const std::vector<Eigen::VectorXd>& bits, double log_q, double log_p) {
    const double w = std::exp(log_q);
    const double F = log_q - log_p;
    const LogProbGrads g = log_prob_grads(params, x, bits);
    gs_axpy(acc, w * (1.0 + F), g.d_log_q);
    gs_axpy(acc, -w, g.d_log_p);
  });
  return acc;
}

GradientSet finite_diff_grad(const ModelParams& params, const Eigen::VectorXd& x,
                             double epsilon) {
  if (!(epsilon > 0.0)) throw UsageError("finite_diff_grad: epsilon must be > 0");
  if (params.arch.total_hidden() > kFiniteDiffGuardBits)
    throw EnumerationGuardError("finite_diff_grad: " +
                                std::to_string(params.arch.total_hidden()) +
                                " stochastic bits exceed the guard of " +
                                std::to_string(kFiniteDiffGuardBits));
  ModelParams work = params;
  GradientSet out = zeros_like(params.arch);
  std::vector<BlockView> wv = block_views(work);
  std::vector<BlockView> ov = block_views(out);
  for (std::size_t k = 0; k < wv.size(); ++k) {
    auto wm = wv[k].mat();
    auto om = ov[k].mat();
    for (Eigen::Index c = 0; c < wv[k].cols; ++c) {
      for (Eigen::Index r = 0; r < wv[k].rows; ++r) {
        if (wv[k].lower_triangular && c >= r) continue;  // masked entries stay zero
        const double saved = wm(r, c);
        wm(r, c) = saved + epsilon;
        const double hi = free_energy_exact(work, x);
        wm(r, c) = saved - epsilon;
        const double lo = free_energy_exact(work, x);
        wm(r, c) = saved;
        om(r, c) = (hi - lo) / (2.0 * epsilon);
      }
    }
  }
  return out;
}

}  // namespace darn
