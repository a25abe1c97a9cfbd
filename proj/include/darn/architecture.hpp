#pragma once

#include <string>
#include <vector>

namespace darn {

// One stochastic binary layer. det_width > 0 places a deterministic tanh
// inter-layer of that width in the gap between this layer and the layer
// below it (the visibles for layer 0), on both the encoder and the decoder
// side, with untied weights.
struct StochasticLayerSpec {
  int n_h = 0;
  int det_width = 0;
  bool encoder_autoregressive = false;
  bool decoder_autoregressive = true;
};

// Layer 0 is adjacent to the visibles; the last layer is the deepest (the
// one carrying the autoregressive prior).
struct Architecture {
  int n_x = 0;
  std::vector<StochasticLayerSpec> layers;
  bool visible_autoregressive = false;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int total_hidden() const;

  // Raw width of the context below layer i (n_x for i == 0).
  int below_width(int i) const { return i == 0 ? n_x : layers[i - 1].n_h; }

  // Width of the (possibly tanh-transformed) context feeding layer i's
  // encoder conditionals.
  int encoder_feature_width(int i) const {
    return layers[i].det_width > 0 ? layers[i].det_width : below_width(i);
  }

  // Width of the transformed context from above feeding layer i's decoder
  // conditionals; 0 for the deepest layer (its decoder is the prior).
  int decoder_feature_width(int i) const {
    if (i + 1 >= num_layers()) return 0;
    const auto& above = layers[i + 1];
    return above.det_width > 0 ? above.det_width : above.n_h;
  }

  // Width of the transformed top-down context feeding the visible
  // conditionals.
  int visible_feature_width() const {
    return layers[0].det_width > 0 ? layers[0].det_width : layers[0].n_h;
  }

  // Throws UsageError when sizes violate the invariants (n_x >= 1, every
  // n_h >= 1, non-empty layer list, det_width >= 0).
  void validate() const;
};

// Parses the layer grammar "x=<n>[,ar]; h=<n>[,det=<m>][,enc-ar][,no-dec-ar]; ..."
// with layers listed bottom-up. Whitespace around tokens is ignored.
Architecture parse_architecture(const std::string& text);

// Inverse of parse_architecture (canonical spelling).
std::string format_architecture(const Architecture& arch);

}  // namespace darn
