#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "darn/model.hpp"

namespace darn {

// Visits every assignment of the stochastic layers for a fixed x, in
// Gray-code order so each step flips a single bit. Encoder/decoder logit
// accumulators are updated incrementally per flip; only the affected layers'
// log terms are recomputed. A plain binary-counter recomputation is kept as
// the correctness oracle in the test suite.
class RepresentationEnumerator {
 public:
  RepresentationEnumerator(const ModelParams& params, const Eigen::VectorXd& x);

  int total_bits() const { return total_bits_; }

  // visitor(bits per layer, ln q(h|x), ln p(x,h))
  template <typename V>
  void enumerate(V&& visitor) {
    reset();
    visitor(bits_, log_q(), log_p());
    const std::uint64_t n = std::uint64_t{1} << total_bits_;
    for (std::uint64_t k = 1; k < n; ++k) {
      const int b = std::countr_zero(k);
      flip(bit_layer_[b], bit_unit_[b]);
      visitor(bits_, log_q(), log_p());
    }
  }

 private:
  void reset();
  void flip(int layer, int unit);
  void recompute_log_q(int layer);
  void recompute_log_p(int layer);
  void recompute_log_p_visible();
  double log_q() const;
  double log_p() const;

  const ModelParams* params_;
  Eigen::VectorXd x_;
  int total_bits_ = 0;
  std::vector<int> bit_layer_, bit_unit_;

  std::vector<Eigen::VectorXd> bits_;
  std::vector<Eigen::VectorXd> enc_ar_, dec_ar_;      // within-layer logit parts
  std::vector<Eigen::VectorXd> enc_cross_, dec_cross_;  // context logit parts
  std::vector<Eigen::VectorXd> pre_enc_, pre_dec_;    // det-layer pre-activations
  Eigen::VectorXd vis_ar_, vis_cross_;
  std::vector<double> log_q_layer_, log_p_layer_;
  double log_p_visible_ = 0.0;
};

// Convenience wrapper with a type-erased visitor.
void enumerate_representations(
    const ModelParams& params, const Eigen::VectorXd& x,
    const std::function<void(const std::vector<Eigen::VectorXd>&, double, double)>& visitor);

}  // namespace darn
