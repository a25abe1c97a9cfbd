#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "darn/optimizer.hpp"
#include "darn/params.hpp"

namespace darn {

struct Dataset {
  // n_examples x n_x, entries strictly 0/1.
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows;
  std::optional<std::pair<int, int>> image_shape;  // (height, width)

  Eigen::Index size() const { return rows.rows(); }
  Eigen::Index width() const { return rows.cols(); }
  Eigen::VectorXd row_vector(Eigen::Index i) const {
    return rows.row(i).cast<double>().transpose();
  }
};

// Raw pixel intensities scaled to [0,1]; produced by load_idx, consumed by
// binarize.
struct ImageIntensities {
  Eigen::MatrixXd values;  // n_examples x (height*width)
  std::pair<int, int> image_shape;
};

// Parses the standard IDX container: big-endian magic (0x00000803 for 3-D
// uint8 images, 2-D uint8 accepted as flat rows), dimension sizes, row-major
// uint8 payload. Pixels are returned scaled by 1/255 for the binarizer.
ImageIntensities load_idx(const std::string& path);

enum class BinarizeMode { threshold, stochastic };
BinarizeMode parse_binarize_mode(const std::string& name);

// threshold mode: bit = intensity >= threshold. stochastic mode:
// bit ~ Bernoulli(intensity) from a stream seeded by `seed`.
Dataset binarize(const Eigen::MatrixXd& intensities, BinarizeMode mode, double threshold,
                 std::uint64_t seed);
Dataset binarize(const ImageIntensities& images, BinarizeMode mode, double threshold,
                 std::uint64_t seed);

// Rows of 0/1 tokens separated by `delimiter`; anything else is rejected
// with its row/column location.
Dataset load_binary_csv(const std::string& path, char delimiter = ',');

// Loads either format, sniffing the IDX magic; IDX data is binarized with
// the given mode/threshold/seed.
Dataset load_dataset(const std::string& path, BinarizeMode mode = BinarizeMode::threshold,
                     double threshold = 0.5, std::uint64_t seed = 0, char delimiter = ',');

struct Checkpoint {
  std::uint32_t version = 1;
  Architecture arch;
  ModelParams params;
  std::optional<RmsPropState> opt_state;
  TrainConfig config_echo;
  std::uint64_t rng_seed = 0;
};

// Binary layout (all multi-byte integers and doubles little-endian):
// magic "DARN", u32 version, architecture (u32 n_x, u8 visible_ar,
// u32 n_layers, per layer u32 n_h, u32 det_width, u8 enc_ar, u8 dec_ar),
// u64 rng_seed, config echo, u8 has_opt_state, then every parameter block
// as f64 column-major in canonical block order (optimizer mean-square and
// step blocks follow in the same order when present).
void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

// Binary PGM (P5), maxval 255. Values must lie in [0,1]; bits map 0 -> 0,
// 1 -> 255, probabilities map to round(255*p) (round half up).
void write_pgm(const std::string& path, const Eigen::VectorXd& values, int height, int width);

}  // namespace darn
