#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "darn/architecture.hpp"
#include "darn/errors.hpp"

namespace darn {

// Parameter blocks for one stochastic layer. Within-layer autoregressive
// matrices are stored as full squares with the upper triangle (diagonal
// included) forced to zero, so the autoregressive products are plain matrix
// multiplications. Absent blocks (flag off, no det layer, deepest layer) are
// 0x0.
struct LayerParams {
  Eigen::MatrixXd dec_within;  // n_h x n_h, strictly lower-triangular
  Eigen::MatrixXd dec_cross;   // n_h x decoder_feature_width(i)
  Eigen::VectorXd dec_bias;    // n_h
  Eigen::MatrixXd det_dec;     // det_width x n_h; maps this layer's bits down
  Eigen::MatrixXd enc_within;  // n_h x n_h, strictly lower-triangular
  Eigen::MatrixXd enc_cross;   // n_h x encoder_feature_width(i)
  Eigen::VectorXd enc_bias;    // n_h
  Eigen::MatrixXd det_enc;     // det_width x below_width(i)
};

struct VisibleParams {
  Eigen::MatrixXd within;  // n_x x n_x, strictly lower-triangular
  Eigen::MatrixXd cross;   // n_x x visible_feature_width()
  Eigen::VectorXd bias;    // n_x
};

struct ModelParams {
  Architecture arch;
  std::vector<LayerParams> layers;
  VisibleParams visible;

  std::size_t parameter_count() const;
};

// Gradients (and optimizer statistics) share the parameter block layout.
using GradientSet = ModelParams;

// Flat writable view of one parameter block. All blocks are contiguous
// column-major (vectors are n x 1), so a (data, rows, cols) triple plus an
// Eigen::Map covers every use: init, serialization, optimizer steps,
// finite differences.
struct BlockView {
  std::string name;
  bool lower_triangular = false;  // strict upper + diagonal masked to zero
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Map<Eigen::MatrixXd> mat() const {
    return Eigen::Map<Eigen::MatrixXd>(data, rows, cols);
  }
  Eigen::Index size() const { return rows * cols; }
};

// Present blocks in canonical order: visible.within (if autoregressive),
// visible.cross, visible.bias, then per layer bottom-up: dec_within?,
// dec_cross?, dec_bias, det_dec?, enc_within?, enc_cross, enc_bias,
// det_enc?. This order is shared by init_params and the checkpoint format.
std::vector<BlockView> block_views(ModelParams& params);
std::vector<BlockView> block_views(const ModelParams& params);  // views are const in spirit

// All-zero parameters with the shapes implied by the architecture.
ModelParams zeros_like(const Architecture& arch);

// Weights i.i.d. uniform in [-scale, +scale] from a deterministic stream
// seeded by `seed`; biases zero. Entries are drawn column-major per block in
// canonical block order (masked positions are drawn, then zeroed), so a seed
// pins the full parameter set.
ModelParams init_params(const Architecture& arch, std::uint64_t seed, double scale);

// Zeroes the upper triangle + diagonal of every within-layer block.
void apply_masks(ModelParams& params);

// Throws DimensionError when block shapes or mask invariants do not match
// the architecture.
void validate_shapes(const Architecture& arch, const ModelParams& params);

bool conforms(const Architecture& arch, const ModelParams& params);

}  // namespace darn
