#include "darn/enumeration.hpp"

#include "darn/math.hpp"

namespace darn {
namespace {

double sum_log_probs(const Eigen::VectorXd& bits, const Eigen::VectorXd& z) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < bits.size(); ++j)
    total += bernoulli_log_prob(bits[j] != 0.0, z[j]);
  return total;
}

}  // namespace

RepresentationEnumerator::RepresentationEnumerator(const ModelParams& params,
                                                   const Eigen::VectorXd& x)
    : params_(&params), x_(x) {
  const Architecture& a = params.arch;
  validate_bits(x, a.n_x, "x");
  total_bits_ = a.total_hidden();
  if (total_bits_ > 25)
    throw EnumerationGuardError("representation too large to enumerate: " +
                                std::to_string(total_bits_) + " stochastic bits");
  for (int i = 0; i < a.num_layers(); ++i)
    for (int j = 0; j < a.layers[i].n_h; ++j) {
      bit_layer_.push_back(i);
      bit_unit_.push_back(j);
    }
}

void RepresentationEnumerator::reset() {
  const Architecture& a = params_->arch;
  const int L = a.num_layers();
  bits_.assign(L, Eigen::VectorXd());
  enc_ar_.assign(L, Eigen::VectorXd());
  dec_ar_.assign(L, Eigen::VectorXd());
  enc_cross_.assign(L, Eigen::VectorXd());
  dec_cross_.assign(L, Eigen::VectorXd());
  pre_enc_.assign(L, Eigen::VectorXd());
  pre_dec_.assign(L, Eigen::VectorXd());
  log_q_layer_.assign(L, 0.0);
  log_p_layer_.assign(L, 0.0);

  for (int i = 0; i < L; ++i) {
    const int n = a.layers[i].n_h;
    bits_[i] = Eigen::VectorXd::Zero(n);
    if (a.layers[i].encoder_autoregressive) enc_ar_[i] = Eigen::VectorXd::Zero(n);
    if (a.layers[i].decoder_autoregressive) dec_ar_[i] = Eigen::VectorXd::Zero(n);
  }

  // Encoder context chains (x is fixed; contexts above layer 0 start at zero).
  for (int i = 0; i < L; ++i) {
    const LayerParams& P = params_->layers[i];
    const Eigen::VectorXd& ctx = i == 0 ? x_ : bits_[i - 1];
    if (a.layers[i].det_width > 0) {
      pre_enc_[i] = P.det_enc * ctx;
      enc_cross_[i] = P.enc_cross * pre_enc_[i].array().tanh().matrix();
    } else {
      enc_cross_[i] = P.enc_cross * ctx;
    }
  }
  // Decoder context chains.
  for (int i = 0; i < L; ++i) {
    if (a.layers[i].det_width > 0) pre_dec_[i] = params_->layers[i].det_dec * bits_[i];
  }
  for (int i = 0; i + 1 < L; ++i) {
    const Eigen::VectorXd feat = a.layers[i + 1].det_width > 0
                                     ? pre_dec_[i + 1].array().tanh().matrix().eval()
                                     : bits_[i + 1];
    dec_cross_[i] = params_->layers[i].dec_cross * feat;
  }
  {
    const Eigen::VectorXd feat = a.layers[0].det_width > 0
                                     ? pre_dec_[0].array().tanh().matrix().eval()
                                     : bits_[0];
    vis_cross_ = params_->visible.cross * feat;
  }
  vis_ar_ = a.visible_autoregressive ? (params_->visible.within * x_).eval()
                                     : Eigen::VectorXd::Zero(a.n_x);

  for (int i = 0; i < L; ++i) {
    recompute_log_q(i);
    recompute_log_p(i);
  }
  recompute_log_p_visible();
}

void RepresentationEnumerator::flip(int i, int t) {
  const Architecture& a = params_->arch;
  const LayerParams& P = params_->layers[i];
  const double delta = bits_[i][t] == 0.0 ? 1.0 : -1.0;
  bits_[i][t] += delta;

  if (a.layers[i].encoder_autoregressive) enc_ar_[i] += delta * P.enc_within.col(t);
  if (a.layers[i].decoder_autoregressive) dec_ar_[i] += delta * P.dec_within.col(t);

  // Downward: this layer's bits feed the prediction of the layer below.
  if (a.layers[i].det_width > 0) {
    pre_dec_[i] += delta * P.det_dec.col(t);
    const Eigen::VectorXd feat = pre_dec_[i].array().tanh();
    if (i == 0)
      vis_cross_ = params_->visible.cross * feat;
    else
      dec_cross_[i - 1] = params_->layers[i - 1].dec_cross * feat;
  } else {
    if (i == 0)
      vis_cross_ += delta * params_->visible.cross.col(t);
    else
      dec_cross_[i - 1] += delta * params_->layers[i - 1].dec_cross.col(t);
  }
  if (i == 0)
    recompute_log_p_visible();
  else
    recompute_log_p(i - 1);

  // Upward: this layer's bits are the encoder context of the layer above.
  if (i + 1 < a.num_layers()) {
    const LayerParams& above = params_->layers[i + 1];
    if (a.layers[i + 1].det_width > 0) {
      pre_enc_[i + 1] += delta * above.det_enc.col(t);
      enc_cross_[i + 1] = above.enc_cross * pre_enc_[i + 1].array().tanh().matrix();
    } else {
      enc_cross_[i + 1] += delta * above.enc_cross.col(t);
    }
    recompute_log_q(i + 1);
  }

  recompute_log_q(i);
  recompute_log_p(i);
}

void RepresentationEnumerator::recompute_log_q(int i) {
  const Architecture& a = params_->arch;
  Eigen::VectorXd z = params_->layers[i].enc_bias + enc_cross_[i];
  if (a.layers[i].encoder_autoregressive) z += enc_ar_[i];
  log_q_layer_[i] = sum_log_probs(bits_[i], z);
}

void RepresentationEnumerator::recompute_log_p(int i) {
  const Architecture& a = params_->arch;
  Eigen::VectorXd z = params_->layers[i].dec_bias;
  if (i + 1 < a.num_layers()) z += dec_cross_[i];
  if (a.layers[i].decoder_autoregressive) z += dec_ar_[i];
  log_p_layer_[i] = sum_log_probs(bits_[i], z);
}

void RepresentationEnumerator::recompute_log_p_visible() {
  Eigen::VectorXd z = params_->visible.bias + vis_cross_;
  if (params_->arch.visible_autoregressive) z += vis_ar_;
  log_p_visible_ = sum_log_probs(x_, z);
}

double RepresentationEnumerator::log_q() const {
  double total = 0.0;
  for (double v : log_q_layer_) total += v;
  return total;
}

double RepresentationEnumerator::log_p() const {
  double total = log_p_visible_;
  for (double v : log_p_layer_) total += v;
  return total;
}

void enumerate_representations(
    const ModelParams& params, const Eigen::VectorXd& x,
    const std::function<void(const std::vector<Eigen::VectorXd>&, double, double)>& visitor) {
  RepresentationEnumerator e(params, x);
  e.enumerate(visitor);
}

}  // namespace darn
