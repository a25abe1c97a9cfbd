#include "darn/params.hpp"

#include "darn/rng.hpp"

namespace darn {
namespace {

void collect_views(const ModelParams& params, std::vector<BlockView>& out) {
  const Architecture& a = params.arch;
  auto add = [&out](const std::string& name, bool tri, const Eigen::MatrixXd& m) {
    out.push_back(BlockView{name, tri, const_cast<double*>(m.data()), m.rows(), m.cols()});
  };
  auto add_vec = [&out](const std::string& name, const Eigen::VectorXd& v) {
    out.push_back(BlockView{name, false, const_cast<double*>(v.data()), v.rows(), 1});
  };
  if (a.visible_autoregressive) add("visible.within", true, params.visible.within);
  add("visible.cross", false, params.visible.cross);
  add_vec("visible.bias", params.visible.bias);
  for (int i = 0; i < a.num_layers(); ++i) {
    const LayerParams& L = params.layers[i];
    const std::string p = "layer" + std::to_string(i) + ".";
    if (a.layers[i].decoder_autoregressive) add(p + "dec_within", true, L.dec_within);
    if (a.decoder_feature_width(i) > 0) add(p + "dec_cross", false, L.dec_cross);
    add_vec(p + "dec_bias", L.dec_bias);
    if (a.layers[i].det_width > 0) add(p + "det_dec", false, L.det_dec);
    if (a.layers[i].encoder_autoregressive) add(p + "enc_within", true, L.enc_within);
    add(p + "enc_cross", false, L.enc_cross);
    add_vec(p + "enc_bias", L.enc_bias);
    if (a.layers[i].det_width > 0) add(p + "det_enc", false, L.det_enc);
  }
}

}  // namespace

std::vector<BlockView> block_views(ModelParams& params) {
  std::vector<BlockView> out;
  collect_views(params, out);
  return out;
}

std::vector<BlockView> block_views(const ModelParams& params) {
  std::vector<BlockView> out;
  collect_views(params, out);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const BlockView& b : block_views(*this)) n += static_cast<std::size_t>(b.size());
  return n;
}

ModelParams zeros_like(const Architecture& arch) {
  arch.validate();
  ModelParams p;
  p.arch = arch;
  const int n_x = arch.n_x;
  p.visible.within = arch.visible_autoregressive ? Eigen::MatrixXd::Zero(n_x, n_x)
                                                 : Eigen::MatrixXd(0, 0);
  p.visible.cross = Eigen::MatrixXd::Zero(n_x, arch.visible_feature_width());
  p.visible.bias = Eigen::VectorXd::Zero(n_x);
  p.layers.resize(arch.num_layers());
  for (int i = 0; i < arch.num_layers(); ++i) {
    const auto& spec = arch.layers[i];
    LayerParams& L = p.layers[i];
    const int n = spec.n_h;
    L.dec_within = spec.decoder_autoregressive ? Eigen::MatrixXd::Zero(n, n)
                                               : Eigen::MatrixXd(0, 0);
    const int dec_w = arch.decoder_feature_width(i);
    L.dec_cross = dec_w > 0 ? Eigen::MatrixXd::Zero(n, dec_w) : Eigen::MatrixXd(0, 0);
    L.dec_bias = Eigen::VectorXd::Zero(n);
    L.enc_within = spec.encoder_autoregressive ? Eigen::MatrixXd::Zero(n, n)
                                               : Eigen::MatrixXd(0, 0);
    L.enc_cross = Eigen::MatrixXd::Zero(n, arch.encoder_feature_width(i));
    L.enc_bias = Eigen::VectorXd::Zero(n);
    if (spec.det_width > 0) {
      L.det_dec = Eigen::MatrixXd::Zero(spec.det_width, n);
      L.det_enc = Eigen::MatrixXd::Zero(spec.det_width, arch.below_width(i));
    } else {
      L.det_dec = Eigen::MatrixXd(0, 0);
      L.det_enc = Eigen::MatrixXd(0, 0);
    }
  }
  return p;
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed, double scale) {
  if (scale < 0.0) throw UsageError("init_params: scale must be >= 0");
  ModelParams p = zeros_like(arch);
  RandomStream rs(seed);
  for (BlockView& b : block_views(p)) {
    if (b.name.ends_with("bias")) continue;
    auto m = b.mat();
    for (Eigen::Index c = 0; c < b.cols; ++c)
      for (Eigen::Index r = 0; r < b.rows; ++r) m(r, c) = rs.uniform(-scale, scale);
  }
  apply_masks(p);
  return p;
}

void apply_masks(ModelParams& params) {
  for (BlockView& b : block_views(params)) {
    if (!b.lower_triangular) continue;
    auto m = b.mat();
    m.triangularView<Eigen::Upper>().setZero();
  }
}

void validate_shapes(const Architecture& arch, const ModelParams& params) {
  arch.validate();
  if (params.arch.num_layers() != arch.num_layers() || params.arch.n_x != arch.n_x)
    throw DimensionError("params do not match architecture layer count / n_x");
  if (static_cast<int>(params.layers.size()) != arch.num_layers())
    throw DimensionError("params layer list size mismatch");

  ModelParams expected = zeros_like(arch);
  std::vector<BlockView> want = block_views(expected);
  // block_views derives presence from params.arch; probe against `arch`.
  ModelParams probe = params;
  probe.arch = arch;
  std::vector<BlockView> have = block_views(probe);
  if (want.size() != have.size()) throw DimensionError("parameter block count mismatch");
  for (std::size_t k = 0; k < want.size(); ++k) {
    if (want[k].rows != have[k].rows || want[k].cols != have[k].cols)
      throw DimensionError("block '" + want[k].name + "' has shape " +
                           std::to_string(have[k].rows) + "x" + std::to_string(have[k].cols) +
                           ", expected " + std::to_string(want[k].rows) + "x" +
                           std::to_string(want[k].cols));
    if (want[k].lower_triangular) {
      auto m = have[k].mat();
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = r; c < m.cols(); ++c)
          if (m(r, c) != 0.0)
            throw DimensionError("block '" + want[k].name + "' violates the triangular mask at (" +
                                 std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }

  // Blocks that the architecture marks absent must actually be absent.
  auto expect_empty = [](const Eigen::MatrixXd& m, const std::string& name) {
    if (m.size() != 0)
      throw DimensionError("block '" + name + "' must be absent for this architecture");
  };
  if (!arch.visible_autoregressive) expect_empty(params.visible.within, "visible.within");
  for (int i = 0; i < arch.num_layers(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    if (!arch.layers[i].decoder_autoregressive)
      expect_empty(params.layers[i].dec_within, p + "dec_within");
    if (!arch.layers[i].encoder_autoregressive)
      expect_empty(params.layers[i].enc_within, p + "enc_within");
    if (arch.decoder_feature_width(i) == 0)
      expect_empty(params.layers[i].dec_cross, p + "dec_cross");
    if (arch.layers[i].det_width == 0) {
      expect_empty(params.layers[i].det_dec, p + "det_dec");
      expect_empty(params.layers[i].det_enc, p + "det_enc");
    }
  }
}

bool conforms(const Architecture& arch, const ModelParams& params) {
  try {
    validate_shapes(arch, params);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace darn
