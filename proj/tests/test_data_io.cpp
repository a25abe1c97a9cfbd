#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "darn/data_io.hpp"
#include "darn/gradients.hpp"
#include "helpers.hpp"

using namespace darn;
using testutil::layer;
using testutil::make_arch;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("darn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Hand-built IDX container: 2 images of 2x2 uint8 pixels.
std::string idx_fixture() {
  std::string b;
  auto u32be = [&b](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  u32be(0x00000803);
  u32be(2);
  u32be(2);
  u32be(2);
  for (unsigned char px : {0, 51, 128, 255, 255, 204, 10, 0}) b.push_back(static_cast<char>(px));
  return b;
}

}  // namespace

TEST_CASE("IDX loading") {
  TempDir tmp;
  SUBCASE("hand-built fixture parses to exact bytes") {
    write_bytes(tmp.file("two.idx"), idx_fixture());
    const ImageIntensities img = load_idx(tmp.file("two.idx"));
    CHECK(img.values.rows() == 2);
    CHECK(img.values.cols() == 4);
    CHECK(img.image_shape == std::make_pair(2, 2));
    const double expected[2][4] = {{0, 51, 128, 255}, {255, 204, 10, 0}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(img.values(i, j) == doctest::Approx(expected[i][j] / 255.0).epsilon(1e-15));
  }
  SUBCASE("empty file reports truncation") {
    write_bytes(tmp.file("empty.idx"), "");
    CHECK_THROWS_WITH_AS(load_idx(tmp.file("empty.idx")), doctest::Contains("truncated"),
                         DataError);
  }
  SUBCASE("wrong magic names the observed value") {
    std::string b = idx_fixture();
    b[2] = 0x09;  // element type int8 instead of uint8
    write_bytes(tmp.file("bad.idx"), b);
    CHECK_THROWS_WITH_AS(load_idx(tmp.file("bad.idx")), doctest::Contains("0x903"), DataError);
  }
  SUBCASE("payload shorter than the header promises") {
    std::string b = idx_fixture();
    b.pop_back();
    write_bytes(tmp.file("short.idx"), b);
    CHECK_THROWS_AS(load_idx(tmp.file("short.idx")), DataError);
  }
}

TEST_CASE("binarization") {
  Eigen::MatrixXd grid(1, 3);
  grid << 0.0, 1.0, 0.4;
  SUBCASE("endpoints are deterministic in both modes") {
    for (BinarizeMode mode : {BinarizeMode::threshold, BinarizeMode::stochastic}) {
      const Dataset d = binarize(grid, mode, 0.5, 9);
      CHECK(d.rows(0, 0) == 0);
      CHECK(d.rows(0, 1) == 1);
    }
  }
  SUBCASE("threshold mode compares against the threshold") {
    CHECK(binarize(grid, BinarizeMode::threshold, 0.4, 0).rows(0, 2) == 1);
    CHECK(binarize(grid, BinarizeMode::threshold, 0.41, 0).rows(0, 2) == 0);
  }
  SUBCASE("stochastic mode draws Bernoulli(intensity)") {
    Eigen::MatrixXd half = Eigen::MatrixXd::Constant(1000, 100, 0.5);
    const Dataset d = binarize(half, BinarizeMode::stochastic, 0.5, 123);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < d.rows.rows(); ++i)
      for (Eigen::Index j = 0; j < d.rows.cols(); ++j) mean += d.rows(i, j);
    mean /= static_cast<double>(d.rows.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
    // Seeded: identical draw streams.
    const Dataset d2 = binarize(half, BinarizeMode::stochastic, 0.5, 123);
    CHECK((d.rows.array() == d2.rows.array()).all());
  }
  SUBCASE("out-of-range intensities are rejected") {
    Eigen::MatrixXd bad(1, 1);
    bad << 1.0001;
    CHECK_THROWS_AS(binarize(bad, BinarizeMode::threshold, 0.5, 0), DataError);
  }
}

TEST_CASE("binary CSV loading") {
  TempDir tmp;
  SUBCASE("well-formed rows") {
    write_bytes(tmp.file("ok.csv"), "1,0,1\n0,1,0\n");
    const Dataset d = load_binary_csv(tmp.file("ok.csv"));
    CHECK(d.size() == 2);
    CHECK(d.width() == 3);
    CHECK(d.rows(0, 0) == 1);
    CHECK(d.rows(1, 2) == 0);
  }
  SUBCASE("space-separated with trailing blanks") {
    write_bytes(tmp.file("ok.txt"), "1 0 1 \n0 1 1\n");
    const Dataset d = load_binary_csv(tmp.file("ok.txt"), ' ');
    CHECK(d.size() == 2);
    CHECK(d.width() == 3);
  }
  SUBCASE("non-binary token with location") {
    write_bytes(tmp.file("bad.csv"), "1,0,1\n0,2,0\n");
    CHECK_THROWS_WITH_AS(load_binary_csv(tmp.file("bad.csv")),
                         doctest::Contains("row 2, column 2"), DataError);
  }
  SUBCASE("ragged rows") {
    write_bytes(tmp.file("ragged.csv"), "1,0,1\n0,1\n");
    CHECK_THROWS_WITH_AS(load_binary_csv(tmp.file("ragged.csv")), doctest::Contains("columns"),
                         DataError);
  }
}

TEST_CASE("checkpoint round trips") {
  TempDir tmp;
  SUBCASE("bit-identical parameters and metadata") {
    const Architecture arch = make_arch(3, {layer(2, 2, true), layer(3)}, true);
    Checkpoint cp;
    cp.arch = arch;
    cp.params = init_params(arch, 77, 0.9);
    cp.rng_seed = 123456789;
    cp.config_echo.learning_rate = 6.75e-5;
    cp.config_echo.minibatch = 37;
    RmsPropState state = make_rmsprop_state(arch);
    gs_fill(state.mean_sq, 0.25);
    cp.opt_state = state;
    save_checkpoint(tmp.file("a.ckpt"), cp);
    const Checkpoint back = load_checkpoint(tmp.file("a.ckpt"));
    CHECK(format_architecture(back.arch) == format_architecture(arch));
    CHECK(back.rng_seed == cp.rng_seed);
    CHECK(back.config_echo.learning_rate == cp.config_echo.learning_rate);
    CHECK(back.config_echo.minibatch == 37);
    REQUIRE(back.opt_state.has_value());

    auto a = block_views(cp.params);
    auto b = block_views(back.params);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k)
      CHECK((a[k].mat().array() == b[k].mat().array()).all());

    // Saving the loaded checkpoint reproduces the file byte for byte.
    save_checkpoint(tmp.file("b.ckpt"), back);
    CHECK(read_bytes(tmp.file("a.ckpt")) == read_bytes(tmp.file("b.ckpt")));
  }
  SUBCASE("property: random architectures round-trip bit-exactly") {
    RandomStream rs(5);
    for (int t = 0; t < 25; ++t) {
      const int n_layers = 1 + static_cast<int>(rs.uniform01() * 3);
      std::vector<StochasticLayerSpec> layers;
      for (int i = 0; i < n_layers; ++i)
        layers.push_back(layer(1 + static_cast<int>(rs.uniform01() * 4),
                               rs.bernoulli(0.5) ? 1 + static_cast<int>(rs.uniform01() * 3) : 0,
                               rs.bernoulli(0.3), rs.bernoulli(0.8)));
      const Architecture arch =
          make_arch(1 + static_cast<int>(rs.uniform01() * 5), layers, rs.bernoulli(0.5));
      Checkpoint cp;
      cp.arch = arch;
      cp.params = init_params(arch, rs.next_u64(), 1.5);
      save_checkpoint(tmp.file("p.ckpt"), cp);
      const Checkpoint back = load_checkpoint(tmp.file("p.ckpt"));
      auto a = block_views(cp.params);
      auto b = block_views(back.params);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k)
        CHECK((a[k].mat().array() == b[k].mat().array()).all());
    }
  }
  SUBCASE("corrupted magic is rejected") {
    const Architecture arch = make_arch(2, {layer(2)});
    Checkpoint cp;
    cp.arch = arch;
    cp.params = init_params(arch, 1, 0.1);
    save_checkpoint(tmp.file("m.ckpt"), cp);
    std::string bytes = read_bytes(tmp.file("m.ckpt"));
    bytes[0] ^= 0x01;
    write_bytes(tmp.file("m.ckpt"), bytes);
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.file("m.ckpt")), doctest::Contains("magic"),
                         DataError);
  }
  SUBCASE("architecture/payload mismatch is rejected") {
    const Architecture arch = make_arch(2, {layer(2)});
    Checkpoint cp;
    cp.arch = arch;
    cp.params = init_params(arch, 1, 0.1);
    save_checkpoint(tmp.file("s.ckpt"), cp);
    std::string bytes = read_bytes(tmp.file("s.ckpt"));
    // Patch the stored n_h from 2 to 3: the payload no longer matches.
    const std::size_t n_h_offset = 4 + 4 + 4 + 1 + 4;
    REQUIRE(bytes[n_h_offset] == 2);
    bytes[n_h_offset] = 3;
    write_bytes(tmp.file("s.ckpt"), bytes);
    CHECK_THROWS_AS(load_checkpoint(tmp.file("s.ckpt")), DataError);
  }
}

TEST_CASE("PGM output") {
  TempDir tmp;
  SUBCASE("one white pixel, exact bytes") {
    write_pgm(tmp.file("w.pgm"), testutil::vec({1.0}), 1, 1);
    CHECK(read_bytes(tmp.file("w.pgm")) == std::string("P5\n1 1\n255\n\xff"));
  }
  SUBCASE("all-zeros 2x2") {
    write_pgm(tmp.file("z.pgm"), Eigen::VectorXd::Zero(4), 2, 2);
    CHECK(read_bytes(tmp.file("z.pgm")) == std::string("P5\n2 2\n255\n") +
                                               std::string(4, '\0'));
  }
  SUBCASE("probability 0.5 rounds half-up to 128") {
    write_pgm(tmp.file("h.pgm"), testutil::vec({0.5}), 1, 1);
    const std::string bytes = read_bytes(tmp.file("h.pgm"));
    CHECK(static_cast<unsigned char>(bytes.back()) == 128);
  }
  SUBCASE("shape and range validation") {
    CHECK_THROWS_AS(write_pgm(tmp.file("b.pgm"), Eigen::VectorXd::Zero(3), 2, 2), DataError);
    CHECK_THROWS_AS(write_pgm(tmp.file("b.pgm"), testutil::vec({1.5}), 1, 1), DataError);
    CHECK_THROWS_AS(write_pgm(tmp.file("b.pgm"), testutil::vec({0.5}), 0, 1), DataError);
  }
}
