#include "darn/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "darn/rng.hpp"

namespace darn {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& what) : bytes_(bytes), what_(what) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

  std::uint32_t u32_be() {
    const char* p = take(4);
    return (std::uint32_t(std::uint8_t(p[0])) << 24) | (std::uint32_t(std::uint8_t(p[1])) << 16) |
           (std::uint32_t(std::uint8_t(p[2])) << 8) | std::uint32_t(std::uint8_t(p[3]));
  }

  std::uint32_t u32_le() {
    const char* p = take(4);
    return std::uint32_t(std::uint8_t(p[0])) | (std::uint32_t(std::uint8_t(p[1])) << 8) |
           (std::uint32_t(std::uint8_t(p[2])) << 16) | (std::uint32_t(std::uint8_t(p[3])) << 24);
  }

  std::uint64_t u64_le() {
    std::uint64_t v = 0;
    const char* p = take(8);
    for (int i = 7; i >= 0; --i) v = (v << 8) | std::uint8_t(p[i]);
    return v;
  }

  double f64_le() { return std::bit_cast<double>(u64_le()); }

  const char* take(std::size_t n) {
    if (pos_ + n > bytes_.size())
      throw DataError(what_ + ": truncated (needed " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ")");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32_le(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64_le(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64_le(double v) { u64_le(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

constexpr char kCheckpointMagic[4] = {'D', 'A', 'R', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

ImageIntensities load_idx(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, "IDX '" + path + "'");
  const std::uint32_t magic = r.u32_be();
  const std::uint32_t dtype = (magic >> 8) & 0xFF;
  const std::uint32_t ndims = magic & 0xFF;
  if ((magic >> 16) != 0 || (dtype != 0x08) || (ndims != 2 && ndims != 3)) {
    std::ostringstream msg;
    msg << "IDX '" << path << "': bad magic 0x" << std::hex << magic
        << " (expected 0x00000803 for 3-D uint8 images)";
    throw DataError(msg.str());
  }
  std::vector<std::uint32_t> dims(ndims);
  for (auto& d : dims) d = r.u32_be();
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (r.remaining() != count)
    throw DataError("IDX '" + path + "': payload has " + std::to_string(r.remaining()) +
                    " bytes, header promises " + std::to_string(count));
  const int n = static_cast<int>(dims[0]);
  const int height = ndims == 3 ? static_cast<int>(dims[1]) : 1;
  const int width = ndims == 3 ? static_cast<int>(dims[2]) : static_cast<int>(dims[1]);
  const int n_x = height * width;

  ImageIntensities out;
  out.image_shape = {height, width};
  out.values.resize(n, n_x);
  const char* p = r.take(count);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n_x; ++j)
      out.values(i, j) =
          static_cast<double>(std::uint8_t(p[static_cast<std::uint64_t>(i) * n_x + j])) / 255.0;
  return out;
}

BinarizeMode parse_binarize_mode(const std::string& name) {
  if (name == "threshold") return BinarizeMode::threshold;
  if (name == "stochastic") return BinarizeMode::stochastic;
  throw UsageError("unknown binarize mode '" + name + "' (expected threshold|stochastic)");
}

Dataset binarize(const Eigen::MatrixXd& intensities, BinarizeMode mode, double threshold,
                 std::uint64_t seed) {
  Dataset out;
  out.rows.resize(intensities.rows(), intensities.cols());
  RandomStream rs(seed);
  for (Eigen::Index i = 0; i < intensities.rows(); ++i) {
    for (Eigen::Index j = 0; j < intensities.cols(); ++j) {
      const double v = intensities(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw DataError("binarize: intensity " + std::to_string(v) + " at (" + std::to_string(i) +
                        "," + std::to_string(j) + ") outside [0,1]");
      const bool bit = mode == BinarizeMode::threshold ? v >= threshold : rs.bernoulli(v);
      out.rows(i, j) = bit ? 1 : 0;
    }
  }
  return out;
}

Dataset binarize(const ImageIntensities& images, BinarizeMode mode, double threshold,
                 std::uint64_t seed) {
  Dataset out = binarize(images.values, mode, threshold, seed);
  out.image_shape = images.image_shape;
  return out;
}

Dataset load_binary_csv(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Trim trailing delimiter-free whitespace (common in space-separated files).
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t') && line.back() != delimiter)
      line.pop_back();
    if (line.empty()) continue;
    const bool ws_delim = delimiter == ' ' || delimiter == '\t';
    std::vector<std::uint8_t> row;
    std::stringstream ss(line);
    std::string token;
    int col = 0;
    while (std::getline(ss, token, delimiter)) {
      ++col;
      std::size_t b = token.find_first_not_of(" \t");
      std::size_t e = token.find_last_not_of(" \t");
      const std::string tok =
          b == std::string::npos ? std::string() : token.substr(b, e - b + 1);
      if (ws_delim && tok.empty()) continue;  // collapse runs of whitespace
      if (tok == "0") {
        row.push_back(0);
      } else if (tok == "1") {
        row.push_back(1);
      } else {
        throw DataError("'" + path + "': non-binary token '" + tok + "' at row " +
                        std::to_string(line_no) + ", column " + std::to_string(col));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("'" + path + "': row " + std::to_string(line_no) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("'" + path + "': no data rows");
  Dataset out;
  out.rows.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out.rows(i, j) = rows[i][j];
  return out;
}

Dataset load_dataset(const std::string& path, BinarizeMode mode, double threshold,
                     std::uint64_t seed, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  char head[2] = {1, 1};
  in.read(head, 2);
  in.close();
  if (in.gcount() == 2 && head[0] == 0 && head[1] == 0)
    return binarize(load_idx(path), mode, threshold, seed);
  return load_binary_csv(path, delimiter);
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  validate_shapes(cp.arch, cp.params);
  Writer w;
  w.raw(kCheckpointMagic, 4);
  w.u32_le(kCheckpointVersion);
  w.u32_le(static_cast<std::uint32_t>(cp.arch.n_x));
  w.u8(cp.arch.visible_autoregressive ? 1 : 0);
  w.u32_le(static_cast<std::uint32_t>(cp.arch.num_layers()));
  for (const auto& layer : cp.arch.layers) {
    w.u32_le(static_cast<std::uint32_t>(layer.n_h));
    w.u32_le(static_cast<std::uint32_t>(layer.det_width));
    w.u8(layer.encoder_autoregressive ? 1 : 0);
    w.u8(layer.decoder_autoregressive ? 1 : 0);
  }
  w.u64_le(cp.rng_seed);
  const TrainConfig& c = cp.config_echo;
  w.f64_le(c.learning_rate);
  w.f64_le(c.momentum);
  w.f64_le(c.rms_decay);
  w.f64_le(c.rms_epsilon);
  w.f64_le(c.init_scale);
  w.u32_le(static_cast<std::uint32_t>(c.minibatch));
  w.u32_le(static_cast<std::uint32_t>(c.epochs));
  w.u64_le(c.seed);
  w.u32_le(static_cast<std::uint32_t>(c.early_stop_patience));
  w.u32_le(static_cast<std::uint32_t>(c.val_mc_samples));
  w.u8(cp.opt_state.has_value() ? 1 : 0);

  auto write_blocks = [&w](const ModelParams& p) {
    for (const BlockView& b : block_views(p)) {
      const double* d = b.data;
      for (Eigen::Index k = 0; k < b.size(); ++k) w.f64_le(d[k]);
    }
  };
  write_blocks(cp.params);
  if (cp.opt_state) {
    write_blocks(cp.opt_state->mean_sq);
    write_blocks(cp.opt_state->step);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, "checkpoint '" + path + "'");
  const char* magic = r.take(4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw DataError("checkpoint '" + path + "': bad magic");
  Checkpoint cp;
  cp.version = r.u32_le();
  if (cp.version != kCheckpointVersion)
    throw DataError("checkpoint '" + path + "': unsupported version " +
                    std::to_string(cp.version));
  cp.arch.n_x = static_cast<int>(r.u32_le());
  cp.arch.visible_autoregressive = r.u8() != 0;
  const std::uint32_t n_layers = r.u32_le();
  if (n_layers == 0 || n_layers > 1024)
    throw DataError("checkpoint '" + path + "': implausible layer count");
  cp.arch.layers.resize(n_layers);
  for (auto& layer : cp.arch.layers) {
    layer.n_h = static_cast<int>(r.u32_le());
    layer.det_width = static_cast<int>(r.u32_le());
    layer.encoder_autoregressive = r.u8() != 0;
    layer.decoder_autoregressive = r.u8() != 0;
  }
  cp.arch.validate();
  cp.rng_seed = r.u64_le();
  TrainConfig& c = cp.config_echo;
  c.learning_rate = r.f64_le();
  c.momentum = r.f64_le();
  c.rms_decay = r.f64_le();
  c.rms_epsilon = r.f64_le();
  c.init_scale = r.f64_le();
  c.minibatch = static_cast<int>(r.u32_le());
  c.epochs = static_cast<int>(r.u32_le());
  c.seed = r.u64_le();
  c.early_stop_patience = static_cast<int>(r.u32_le());
  c.val_mc_samples = static_cast<int>(r.u32_le());
  const bool has_opt = r.u8() != 0;

  auto read_blocks = [&r](ModelParams& p) {
    for (BlockView& b : block_views(p)) {
      double* d = b.data;
      for (Eigen::Index k = 0; k < b.size(); ++k) d[k] = r.f64_le();
    }
  };
  cp.params = zeros_like(cp.arch);
  read_blocks(cp.params);
  if (has_opt) {
    RmsPropState state = make_rmsprop_state(cp.arch);
    read_blocks(state.mean_sq);
    read_blocks(state.step);
    cp.opt_state = std::move(state);
  }
  if (r.remaining() != 0)
    throw DataError("checkpoint '" + path + "': " + std::to_string(r.remaining()) +
                    " trailing bytes (shape mismatch against the stored architecture)");
  validate_shapes(cp.arch, cp.params);
  return cp;
}

void write_pgm(const std::string& path, const Eigen::VectorXd& values, int height, int width) {
  if (height < 1 || width < 1) throw DataError("write_pgm: missing or invalid image shape");
  if (values.size() != static_cast<Eigen::Index>(height) * width)
    throw DataError("write_pgm: " + std::to_string(values.size()) + " values for " +
                    std::to_string(height) + "x" + std::to_string(width) + " image");
  std::string payload;
  payload.reserve(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double v = values[k];
    if (!(v >= 0.0 && v <= 1.0))
      throw DataError("write_pgm: value " + std::to_string(v) + " outside [0,1]");
    payload.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace darn
