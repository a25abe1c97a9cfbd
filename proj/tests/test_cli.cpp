#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "darn/cli.hpp"
#include "darn/data_io.hpp"
#include "helpers.hpp"

using namespace darn;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
};

CliResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("darn");
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  int code = -1;
  try {
    code = run_cli(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("darn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, '\t')) fields.push_back(f);
  return fields;
}

std::string last_line(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l))
    if (!l.empty()) lines.push_back(l);
  REQUIRE(!lines.empty());
  return lines.back();
}

std::string make_zero_checkpoint(const TempDir& tmp, const std::string& arch_text) {
  const Architecture arch = parse_architecture(arch_text);
  Checkpoint cp;
  cp.arch = arch;
  cp.params = init_params(arch, 0, 0.0);
  const std::string path = tmp.file("zero.ckpt");
  save_checkpoint(path, cp);
  return path;
}

}  // namespace

TEST_CASE("cli: train parses the architecture grammar") {
  TempDir tmp;
  write_text(tmp.file("data.csv"), "1,0,1,0\n0,1,0,1\n1,1,0,0\n0,0,1,1\n");

  SUBCASE("defaults: single layer, decoder-autoregressive, encoder not") {
    const CliResult r = run({"train", "--data", tmp.file("data.csv"), "--arch", "x=4;h=3",
                             "--out", tmp.file("m.ckpt"), "--epochs", "1", "--minibatch", "2"});
    CHECK(r.exit_code == 0);
    const Checkpoint cp = load_checkpoint(tmp.file("m.ckpt"));
    CHECK(cp.arch.n_x == 4);
    CHECK(cp.arch.layers[0].n_h == 3);
    CHECK(cp.arch.layers[0].decoder_autoregressive);
    CHECK_FALSE(cp.arch.layers[0].encoder_autoregressive);
    CHECK_FALSE(cp.arch.visible_autoregressive);
  }
  SUBCASE("n_h = 0 is a hard parse error") {
    const CliResult r = run({"train", "--data", tmp.file("data.csv"), "--arch", "x=4;h=0",
                             "--out", tmp.file("m.ckpt")});
    CHECK(r.exit_code == 1);
  }
  SUBCASE("unknown flags are hard errors") {
    const CliResult r = run({"train", "--data", tmp.file("data.csv"), "--arch", "x=4;h=3",
                             "--out", tmp.file("m.ckpt"), "--frobnicate"});
    CHECK(r.exit_code == 1);
  }
  SUBCASE("the deterministic-layer shape from the paper-scale grammar") {
    const Architecture b = parse_architecture("x=784;h=16,det=100");
    const ModelParams p = init_params(b, 0, 0.0);
    CHECK(p.layers[0].det_enc.rows() == 100);
    CHECK(p.layers[0].det_enc.cols() == 784);
    CHECK(p.layers[0].det_dec.rows() == 100);
    CHECK(p.layers[0].det_dec.cols() == 16);
    CHECK(p.visible.cross.cols() == 100);
    CHECK(p.layers[0].enc_cross.cols() == 100);
  }
  SUBCASE("training log format: four tab-separated fields per epoch") {
    const std::string log = tmp.file("train.log");
    const CliResult r = run({"train", "--data", tmp.file("data.csv"), "--arch", "x=4;h=2",
                             "--out", tmp.file("m.ckpt"), "--epochs", "3", "--minibatch", "2",
                             "--val", tmp.file("data.csv"), "--log", log});
    CHECK(r.exit_code == 0);
    std::ifstream in(log);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
      const auto fields = split_fields(line);
      CHECK(fields.size() == 4);
      CHECK(std::stoi(fields[0]) == rows + 1);
      CHECK(std::isfinite(std::stod(fields[1])));
      CHECK(std::isfinite(std::stod(fields[2])));
      ++rows;
    }
    CHECK(rows == 3);
  }
}

TEST_CASE("cli: sample") {
  TempDir tmp;
  const std::string ckpt = make_zero_checkpoint(tmp, "x=4;h=2");

  SUBCASE("count 0 writes nothing and succeeds") {
    const CliResult r = run({"sample", "--checkpoint", ckpt, "--count", "0", "--out-csv",
                             tmp.file("s.csv")});
    CHECK(r.exit_code == 0);
    std::ifstream in(tmp.file("s.csv"));
    std::string line;
    CHECK_FALSE(static_cast<bool>(std::getline(in, line)));
  }
  SUBCASE("fixed seed reproduces outputs") {
    for (const char* name : {"a.csv", "b.csv"}) {
      const CliResult r = run({"sample", "--checkpoint", ckpt, "--count", "50", "--seed", "9",
                               "--out-csv", tmp.file(name)});
      CHECK(r.exit_code == 0);
    }
    std::ifstream a(tmp.file("a.csv")), b(tmp.file("b.csv"));
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(!sa.str().empty());
  }
  SUBCASE("zero-params per-pixel mean is one half") {
    const CliResult r = run({"sample", "--checkpoint", ckpt, "--count", "100000", "--seed", "3",
                             "--out-csv", tmp.file("big.csv")});
    CHECK(r.exit_code == 0);
    std::ifstream in(tmp.file("big.csv"));
    std::string line;
    double sum = 0.0;
    long long cells = 0;
    while (std::getline(in, line)) {
      for (char c : line)
        if (c == '0' || c == '1') {
          sum += c - '0';
          ++cells;
        }
    }
    CHECK(cells == 400000);
    CHECK(sum / static_cast<double>(cells) == doctest::Approx(0.5).epsilon(0.02));
  }
  SUBCASE("PGM output needs a square or an explicit shape") {
    const CliResult bad = run({"sample", "--checkpoint", make_zero_checkpoint(tmp, "x=6;h=2"),
                               "--count", "1", "--out-pgm", tmp.file("imgs")});
    CHECK(bad.exit_code == 2);
    const CliResult ok = run({"sample", "--checkpoint", make_zero_checkpoint(tmp, "x=6;h=2"),
                              "--count", "2", "--out-pgm", tmp.file("imgs"), "--shape", "2x3"});
    CHECK(ok.exit_code == 0);
    CHECK(std::filesystem::exists(tmp.file("imgs") + "/sample_000001.pgm"));
  }
  SUBCASE("probability grids instead of bits") {
    const CliResult r = run({"sample", "--checkpoint", ckpt, "--count", "1", "--probs",
                             "--out-csv", tmp.file("p.csv")});
    CHECK(r.exit_code == 0);
    std::ifstream in(tmp.file("p.csv"));
    std::string line;
    REQUIRE(static_cast<bool>(std::getline(in, line)));
    CHECK(line.find("0.5") != std::string::npos);
  }
}

TEST_CASE("cli: eval") {
  TempDir tmp;
  const std::string ckpt = make_zero_checkpoint(tmp, "x=3;h=2");
  write_text(tmp.file("data.csv"), "1,0,1\n0,1,0\n");
  const double expect = 3 * std::log(2.0);

  SUBCASE("exact mode on zero params reports n_x ln 2 per datum") {
    const CliResult r = run({"eval", "--checkpoint", ckpt, "--data", tmp.file("data.csv"),
                             "--mode", "exact"});
    CHECK(r.exit_code == 0);
    const auto fields = split_fields(last_line(r.out));
    REQUIRE(fields.size() == 6);
    CHECK(std::stod(fields[0]) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(fields[3] == "exact");
  }
  SUBCASE("fe mode upper-bounds exact mode") {
    const CliResult fe = run({"eval", "--checkpoint", ckpt, "--data", tmp.file("data.csv"),
                              "--mode", "fe"});
    const CliResult ex = run({"eval", "--checkpoint", ckpt, "--data", tmp.file("data.csv"),
                              "--mode", "exact"});
    CHECK(std::stod(split_fields(last_line(fe.out))[0]) >=
          std::stod(split_fields(last_line(ex.out))[0]) - 1e-9);
  }
  SUBCASE("is mode near exact mode on a tiny model") {
    const CliResult is = run({"eval", "--checkpoint", ckpt, "--data", tmp.file("data.csv"),
                              "--mode", "is", "--S", "10000", "--repeats", "3", "--seed", "1"});
    CHECK(is.exit_code == 0);
    const auto fields = split_fields(last_line(is.out));
    CHECK(std::stod(fields[0]) == doctest::Approx(expect).epsilon(0.02));
    CHECK(fields[3] == "is");
    CHECK(fields[4] == "10000");
    CHECK(fields[5] == "3");
  }
  SUBCASE("per-datum lines precede the summary") {
    const CliResult r = run({"eval", "--checkpoint", ckpt, "--data", tmp.file("data.csv"),
                             "--mode", "exact", "--per-datum"});
    std::stringstream ss(r.out);
    std::string line;
    int lines = 0;
    while (std::getline(ss, line)) ++lines;
    CHECK(lines == 3);
  }
  SUBCASE("exact mode guard suggests is mode, exit code 1") {
    const std::string big = make_zero_checkpoint(tmp, "x=3;h=21");
    const CliResult r = run({"eval", "--checkpoint", big, "--data", tmp.file("data.csv"),
                             "--mode", "exact"});
    CHECK(r.exit_code == 1);
  }
  SUBCASE("missing checkpoint is a data error") {
    const CliResult r = run({"eval", "--checkpoint", tmp.file("nope.ckpt"), "--data",
                             tmp.file("data.csv"), "--mode", "exact"});
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("cli: inspect and config files") {
  TempDir tmp;
  write_text(tmp.file("data.csv"), "1,0\n0,1\n");
  SUBCASE("inspect prints the round-trippable architecture") {
    const std::string ckpt = make_zero_checkpoint(tmp, "x=2,ar;h=2,det=3");
    const CliResult r = run({"inspect", "--checkpoint", ckpt});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("x=2,ar;h=2,det=3") != std::string::npos);
  }
  SUBCASE("config file values are merged, flags win") {
    write_text(tmp.file("run.cfg"), "epochs=2\nminibatch=1\n");
    const CliResult r = run({"train", "--data", tmp.file("data.csv"), "--arch", "x=2;h=1",
                             "--out", tmp.file("m.ckpt"), "--config", tmp.file("run.cfg"),
                             "--minibatch", "2"});
    CHECK(r.exit_code == 0);
    const Checkpoint cp = load_checkpoint(tmp.file("m.ckpt"));
    CHECK(cp.config_echo.epochs == 2);     // from the config file
    CHECK(cp.config_echo.minibatch == 2);  // flag took precedence
  }
}
