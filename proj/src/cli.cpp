#include "darn/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "darn/data_io.hpp"
#include "darn/evaluation.hpp"
#include "darn/mdl.hpp"
#include "darn/sampler.hpp"
#include "darn/train.hpp"

namespace darn {
namespace {

struct DataFlags {
  std::string binarize_mode = "threshold";
  double threshold = 0.5;
  std::string delimiter = ",";
  std::uint64_t binarize_seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--binarize", binarize_mode,
                    "Binarization for IDX intensities: threshold|stochastic")
        ->check(CLI::IsMember({"threshold", "stochastic"}));
    cmd->add_option("--threshold", threshold, "Threshold for --binarize threshold");
    cmd->add_option("--delimiter", delimiter, "Column separator for text datasets");
    cmd->add_option("--binarize-seed", binarize_seed, "Seed for --binarize stochastic");
  }

  Dataset load(const std::string& path) const {
    if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
    return load_dataset(path, parse_binarize_mode(binarize_mode), threshold, binarize_seed,
                        delimiter[0]);
  }
};

std::pair<int, int> resolve_image_shape(const std::string& shape_flag, int n_x) {
  if (!shape_flag.empty()) {
    const auto sep = shape_flag.find('x');
    if (sep == std::string::npos)
      throw UsageError("--shape expects HxW, e.g. 28x28");
    const int h = std::stoi(shape_flag.substr(0, sep));
    const int w = std::stoi(shape_flag.substr(sep + 1));
    if (h < 1 || w < 1 || h * w != n_x)
      throw UsageError("--shape " + shape_flag + " does not cover " + std::to_string(n_x) +
                       " visibles");
    return {h, w};
  }
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_x))));
  if (side * side != n_x)
    throw DataError("no image shape: " + std::to_string(n_x) +
                    " visibles is not square; pass --shape HxW");
  return {side, side};
}

int cmd_train(const std::string& data_path, const std::string& arch_text,
              const std::string& out_path, const std::string& val_path,
              const std::string& log_path, const TrainConfig& cfg, const DataFlags& df) {
  const Architecture arch = parse_architecture(arch_text);
  const Dataset data = df.load(data_path);
  Dataset val;
  const bool has_val = !val_path.empty();
  if (has_val) val = df.load(val_path);

  const TrainResult result = train(data, arch, cfg, has_val ? &val : nullptr);

  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path, std::ios::trunc);
    if (!log_file) throw DataError("cannot write '" + log_path + "'");
  }
  for (const TrainLogEntry& e : result.log) {
    std::ostringstream line;
    line << e.epoch << "\t" << e.train_nats << "\t" << e.val_nats << "\t" << e.wall_seconds;
    std::cout << line.str() << "\n";
    if (log_file) log_file << line.str() << "\n";
  }

  Checkpoint cp;
  cp.arch = arch;
  cp.params = result.params;
  cp.config_echo = cfg;
  cp.rng_seed = cfg.seed;
  save_checkpoint(out_path, cp);
  std::cerr << "wrote " << out_path << " (best epoch " << result.best_epoch << ", objective "
            << result.best_val << " nats/datum)\n";
  return 0;
}

int cmd_sample(const std::string& checkpoint_path, long long count, std::uint64_t seed,
               const std::string& out_pgm, const std::string& out_csv, bool probs,
               const std::string& shape_flag) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  std::pair<int, int> shape{0, 0};
  if (!out_pgm.empty()) {
    shape = resolve_image_shape(shape_flag, cp.arch.n_x);
    std::filesystem::create_directories(out_pgm);
  }
  std::ofstream csv;
  if (!out_csv.empty()) {
    csv.open(out_csv, std::ios::trunc);
    if (!csv) throw DataError("cannot write '" + out_csv + "'");
  }

  RandomStream rng(seed);
  for (long long i = 0; i < count; ++i) {
    const DecoderSample s = sample_decoder(cp.params, rng);
    const Eigen::VectorXd& values = probs ? s.visible_probs : s.x;
    if (csv.is_open()) {
      for (Eigen::Index j = 0; j < values.size(); ++j) {
        if (j) csv << ",";
        if (probs)
          csv << values[j];
        else
          csv << static_cast<int>(values[j]);
      }
      csv << "\n";
    }
    if (!out_pgm.empty()) {
      std::ostringstream name;
      name << out_pgm << "/sample_" << std::setfill('0') << std::setw(6) << i << ".pgm";
      write_pgm(name.str(), values, shape.first, shape.second);
    }
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& mode_name, long long S, int repeats, std::uint64_t seed,
             int threads, bool per_datum, const DataFlags& df) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  const Dataset data = df.load(data_path);
  const EvalMode mode = parse_eval_mode(mode_name);
  const EvalSummary summary = dataset_eval(cp.params, data, mode, S, repeats, seed, threads);
  std::cout << std::setprecision(17);
  if (per_datum)
    for (std::size_t i = 0; i < summary.per_datum.size(); ++i)
      std::cout << i << "\t" << summary.per_datum[i] << "\n";
  std::cout << summary.mean_nats << "\t" << summary.ci_low << "\t" << summary.ci_high << "\t"
            << eval_mode_name(summary.mode) << "\t" << summary.S << "\t" << summary.repeats
            << "\n";
  return 0;
}

int cmd_inspect(const std::string& checkpoint_path) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  std::cout << "architecture\t" << format_architecture(cp.arch) << "\n";
  std::cout << "parameters\t" << cp.params.parameter_count() << "\n";
  std::cout << "rng_seed\t" << cp.rng_seed << "\n";
  std::cout << "optimizer_state\t" << (cp.opt_state ? "yes" : "no") << "\n";
  std::cout << "config\tlr=" << cp.config_echo.learning_rate
            << " momentum=" << cp.config_echo.momentum << " rms_decay=" << cp.config_echo.rms_decay
            << " rms_epsilon=" << cp.config_echo.rms_epsilon
            << " minibatch=" << cp.config_echo.minibatch << " epochs=" << cp.config_echo.epochs
            << "\n";
  return 0;
}

// Merges an optional "--config PATH" key=value file into the argument list:
// file keys not already given on the command line are appended as --key=value,
// so explicit flags always take precedence and unknown keys surface as the
// usual unknown-option errors.
std::vector<std::string> merge_config_args(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
    } else {
      ++i;
    }
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot open config file '" + config_path + "'");
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (!given) args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Deep autoregressive generative autoencoder"};
  app.require_subcommand(1);

  // train
  auto* trn = app.add_subcommand("train", "Train a model and write a checkpoint");
  std::string config_path_doc;
  trn->add_option("--config", config_path_doc,
                  "key=value file merged into the flags; flags take precedence");
  std::string data_path, arch_text, out_path, val_path, log_path;
  TrainConfig cfg;
  DataFlags train_df;
  trn->add_option("--data", data_path, "Training data (IDX or 0/1 text)")->required();
  trn->add_option("--arch", arch_text,
                  "Architecture, e.g. x=784;h=16,det=100 (layers bottom-up)")
      ->required();
  trn->add_option("--out", out_path, "Checkpoint path to write")->required();
  trn->add_option("--val", val_path, "Validation data");
  trn->add_option("--lr", cfg.learning_rate, "Learning rate");
  trn->add_option("--epochs", cfg.epochs, "Training epochs");
  trn->add_option("--minibatch", cfg.minibatch, "Minibatch size");
  trn->add_option("--seed", cfg.seed, "Seed for init, shuffling and sampling");
  trn->add_option("--momentum", cfg.momentum, "Momentum on the rescaled step");
  trn->add_option("--rms-decay", cfg.rms_decay, "Decay of the squared-gradient average");
  trn->add_option("--rms-epsilon", cfg.rms_epsilon, "Denominator floor");
  trn->add_option("--patience", cfg.early_stop_patience,
                  "Early-stopping patience in epochs (0 = off)");
  trn->add_option("--threads", cfg.threads, "Worker cap for per-datum passes");
  trn->add_option("--init-scale", cfg.init_scale, "Uniform weight init range");
  trn->add_option("--val-samples", cfg.val_mc_samples, "Encoder draws per validation datum");
  trn->add_option("--log", log_path, "Also write the per-epoch log to this file");
  train_df.attach(trn);

  // sample
  auto* smp = app.add_subcommand("sample", "Draw decoder samples from a checkpoint");
  std::string smp_checkpoint, out_pgm, out_csv, shape_flag;
  long long count = 1;
  std::uint64_t smp_seed = 0;
  bool probs = false;
  smp->add_option("--checkpoint", smp_checkpoint, "Checkpoint to sample from")->required();
  smp->add_option("--count", count, "Number of samples")->check(CLI::NonNegativeNumber);
  smp->add_option("--seed", smp_seed, "Sampling seed");
  smp->add_option("--out-pgm", out_pgm, "Directory for one PGM per sample");
  smp->add_option("--out-csv", out_csv, "CSV file, one sample per row");
  smp->add_flag("--probs", probs,
                "Emit the visible Bernoulli probabilities instead of sampled bits");
  smp->add_option("--shape", shape_flag, "Image shape HxW for --out-pgm");

  // eval
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  evl->add_option("--config", config_path_doc,
                  "key=value file merged into the flags; flags take precedence");
  std::string evl_checkpoint, evl_data, mode_name = "exact";
  long long S = 100000;
  int repeats = 10, threads = 1;
  std::uint64_t evl_seed = 0;
  bool per_datum = false;
  DataFlags eval_df;
  evl->add_option("--checkpoint", evl_checkpoint, "Checkpoint to evaluate")->required();
  evl->add_option("--data", evl_data, "Dataset (IDX or 0/1 text)")->required();
  evl->add_option("--mode", mode_name,
                  "exact: enumerate p(x); is: importance sampling; fe: expected description length")
      ->check(CLI::IsMember({"exact", "is", "fe"}));
  evl->add_option("--S", S, "Samples per repeat (is) / per datum (fe at scale)");
  evl->add_option("--repeats", repeats, "Estimate repeats for the confidence interval");
  evl->add_option("--seed", evl_seed, "Evaluation seed");
  evl->add_option("--threads", threads, "Worker cap across data");
  evl->add_flag("--per-datum", per_datum, "Print one line per datum before the summary");
  eval_df.attach(evl);

  // inspect
  auto* ins = app.add_subcommand("inspect", "Print checkpoint metadata");
  std::string ins_checkpoint;
  ins->add_option("--checkpoint", ins_checkpoint, "Checkpoint to describe")->required();

  std::vector<std::string> args;
  try {
    args = merge_config_args(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    std::vector<const char*> argv2;
    argv2.push_back(argc > 0 ? argv[0] : "darn");
    for (const std::string& a : args) argv2.push_back(a.c_str());
    app.parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (trn->parsed()) return cmd_train(data_path, arch_text, out_path, val_path, log_path, cfg,
                                        train_df);
    if (smp->parsed())
      return cmd_sample(smp_checkpoint, count, smp_seed, out_pgm, out_csv, probs, shape_flag);
    if (evl->parsed())
      return cmd_eval(evl_checkpoint, evl_data, mode_name, S, repeats, evl_seed, threads,
                      per_datum, eval_df);
    if (ins->parsed()) return cmd_inspect(ins_checkpoint);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const EnumerationGuardError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace darn
