#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "darn/data_io.hpp"
#include "darn/evaluation.hpp"
#include "darn/gradients.hpp"
#include "darn/mdl.hpp"
#include "darn/sampler.hpp"
#include "darn/train.hpp"

namespace py = pybind11;
using namespace darn;

namespace {

Representation rep_from_layers(const ModelParams& params, const Eigen::VectorXd& x,
                               const std::vector<Eigen::VectorXd>& bits) {
  return representation_from_bits(params, x, bits);
}

Dataset dataset_from_array(const Eigen::MatrixXd& rows) {
  Dataset d;
  d.rows.resize(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double v = rows(i, j);
      if (v != 0.0 && v != 1.0) throw DataError("dataset entries must be 0/1");
      d.rows(i, j) = v != 0.0 ? 1 : 0;
    }
  return d;
}

py::dict blocks_dict(const ModelParams& p) {
  py::dict out;
  for (const BlockView& b : block_views(p))
    out[py::str(b.name)] = Eigen::MatrixXd(b.mat());
  return out;
}

TrainConfig config_from_kwargs(double lr, double momentum, double rms_decay, double rms_epsilon,
                               int minibatch, int epochs, std::uint64_t seed, int patience,
                               int threads, double init_scale, int val_mc_samples) {
  TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.momentum = momentum;
  cfg.rms_decay = rms_decay;
  cfg.rms_epsilon = rms_epsilon;
  cfg.minibatch = minibatch;
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.early_stop_patience = patience;
  cfg.threads = threads;
  cfg.init_scale = init_scale;
  cfg.val_mc_samples = val_mc_samples;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_darn_core, m) {
  m.doc() = "Deep autoregressive generative autoencoder (C++ core)";

  py::register_exception<DimensionError>(m, "DimensionError");
  py::register_exception<EnumerationGuardError>(m, "EnumerationGuardError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<UsageError>(m, "UsageError");

  py::class_<StochasticLayerSpec>(m, "StochasticLayerSpec")
      .def(py::init<>())
      .def_readwrite("n_h", &StochasticLayerSpec::n_h)
      .def_readwrite("det_width", &StochasticLayerSpec::det_width)
      .def_readwrite("encoder_autoregressive", &StochasticLayerSpec::encoder_autoregressive)
      .def_readwrite("decoder_autoregressive", &StochasticLayerSpec::decoder_autoregressive);

  py::class_<Architecture>(m, "Architecture")
      .def(py::init<>())
      .def_readwrite("n_x", &Architecture::n_x)
      .def_readwrite("layers", &Architecture::layers)
      .def_readwrite("visible_autoregressive", &Architecture::visible_autoregressive)
      .def("total_hidden", &Architecture::total_hidden)
      .def("validate", &Architecture::validate)
      .def("__repr__",
           [](const Architecture& a) { return "Architecture('" + format_architecture(a) + "')"; });

  m.def("parse_architecture", &parse_architecture, py::arg("text"));
  m.def("format_architecture", &format_architecture, py::arg("arch"));

  py::class_<ModelParams>(m, "ModelParams")
      .def_readonly("arch", &ModelParams::arch)
      .def("parameter_count", &ModelParams::parameter_count)
      .def("blocks", &blocks_dict, "Copies of every parameter block, keyed by name");

  m.def("init_params", &init_params, py::arg("arch"), py::arg("seed"), py::arg("scale"));
  m.def("count_multiplications", &count_multiplications, py::arg("arch"));

  m.def(
      "sample_decoder",
      [](const ModelParams& params, std::uint64_t seed, long long count) {
        RandomStream rng(seed);
        Eigen::MatrixXd bits(count, params.arch.n_x);
        Eigen::MatrixXd probs(count, params.arch.n_x);
        for (long long i = 0; i < count; ++i) {
          const DecoderSample s = sample_decoder(params, rng);
          bits.row(i) = s.x.transpose();
          probs.row(i) = s.visible_probs.transpose();
        }
        return py::make_tuple(bits, probs);
      },
      py::arg("params"), py::arg("seed"), py::arg("count") = 1,
      "Draws ancestral decoder samples; returns (bits, visible_probs) row per sample");

  m.def(
      "sample_encoder",
      [](const ModelParams& params, const Eigen::VectorXd& x, std::uint64_t seed) {
        RandomStream rng(seed);
        const Representation rep = sample_encoder(params, x, rng);
        std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> out;
        for (const auto& layer : rep.layers) out.emplace_back(layer.bits, layer.probs);
        return out;
      },
      py::arg("params"), py::arg("x"), py::arg("seed"),
      "Returns [(bits, probs)] per stochastic layer, bottom-up");

  m.def(
      "joint_log_prob",
      [](const ModelParams& params, const Eigen::VectorXd& x,
         const std::vector<Eigen::VectorXd>& bits) {
        return joint_log_prob(params, x, rep_from_layers(params, x, bits));
      },
      py::arg("params"), py::arg("x"), py::arg("bits"));
  m.def(
      "encoder_log_prob",
      [](const ModelParams& params, const Eigen::VectorXd& x,
         const std::vector<Eigen::VectorXd>& bits) {
        return encoder_log_prob(params, x, rep_from_layers(params, x, bits));
      },
      py::arg("params"), py::arg("x"), py::arg("bits"));

  m.def(
      "description_length",
      [](const ModelParams& params, const Eigen::VectorXd& x,
         const std::vector<Eigen::VectorXd>& bits) {
        const DescriptionLength d =
            description_length_terms(params, x, rep_from_layers(params, x, bits));
        py::dict out;
        out["residual"] = d.residual;
        out["prior_cost"] = d.prior_cost;
        out["bits_back"] = d.bits_back;
        out["total"] = d.total;
        return out;
      },
      py::arg("params"), py::arg("x"), py::arg("bits"));

  m.def("free_energy_exact", &free_energy_exact, py::arg("params"), py::arg("x"));
  m.def(
      "free_energy_mc",
      [](const ModelParams& params, const Eigen::VectorXd& x, int n_samples, std::uint64_t seed) {
        RandomStream rng(seed);
        return free_energy_mc(params, x, n_samples, rng);
      },
      py::arg("params"), py::arg("x"), py::arg("n_samples"), py::arg("seed"));

  m.def("exact_log_likelihood", &exact_log_likelihood, py::arg("params"), py::arg("x"));
  m.def(
      "importance_sampling_ll",
      [](const ModelParams& params, const Eigen::VectorXd& x, long long S, int repeats,
         std::uint64_t seed) {
        RandomStream rng(seed);
        const LikelihoodEstimate est = importance_sampling_ll(params, x, S, repeats, rng);
        py::dict out;
        out["mean_nats"] = est.mean_nats;
        out["repeats"] = est.repeats;
        out["samples_per_repeat"] = est.samples_per_repeat;
        out["ci95_low"] = est.ci95_low;
        out["ci95_high"] = est.ci95_high;
        out["per_repeat_values"] = est.per_repeat_values;
        return out;
      },
      py::arg("params"), py::arg("x"), py::arg("S"), py::arg("repeats"), py::arg("seed"));

  m.def(
      "dataset_eval",
      [](const ModelParams& params, const Eigen::MatrixXd& rows, const std::string& mode,
         long long S, int repeats, std::uint64_t seed, int threads) {
        const EvalSummary s =
            dataset_eval(params, dataset_from_array(rows), parse_eval_mode(mode), S, repeats,
                         seed, threads);
        py::dict out;
        out["mean_nats"] = s.mean_nats;
        out["ci_low"] = s.ci_low;
        out["ci_high"] = s.ci_high;
        out["mode"] = eval_mode_name(s.mode);
        out["S"] = s.S;
        out["repeats"] = s.repeats;
        out["per_datum"] = s.per_datum;
        return out;
      },
      py::arg("params"), py::arg("rows"), py::arg("mode"), py::arg("S") = 100000,
      py::arg("repeats") = 10, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "backward",
      [](const ModelParams& params, const Eigen::VectorXd& x, std::uint64_t seed) {
        RandomStream rng(seed);
        const Representation rep = sample_encoder(params, x, rng);
        GradientSet g = backward(params, x, rep);
        return blocks_dict(g);
      },
      py::arg("params"), py::arg("x"), py::arg("seed"),
      "Samples an encoder representation and returns the per-block gradient estimate");

  m.def(
      "train",
      [](const Eigen::MatrixXd& rows, const Architecture& arch, py::object val_rows, double lr,
         double momentum, double rms_decay, double rms_epsilon, int minibatch, int epochs,
         std::uint64_t seed, int patience, int threads, double init_scale, int val_mc_samples) {
        const Dataset data = dataset_from_array(rows);
        Dataset val;
        const bool has_val = !val_rows.is_none();
        if (has_val) val = dataset_from_array(val_rows.cast<Eigen::MatrixXd>());
        const TrainConfig cfg =
            config_from_kwargs(lr, momentum, rms_decay, rms_epsilon, minibatch, epochs, seed,
                               patience, threads, init_scale, val_mc_samples);
        const TrainResult r = train(data, arch, cfg, has_val ? &val : nullptr);
        py::list log;
        for (const TrainLogEntry& e : r.log)
          log.append(py::make_tuple(e.epoch, e.train_nats, e.val_nats, e.wall_seconds));
        return py::make_tuple(r.params, log, r.best_epoch, r.best_val);
      },
      py::arg("rows"), py::arg("arch"), py::arg("val_rows") = py::none(),
      py::arg("lr") = 2.5e-4, py::arg("momentum") = 0.9, py::arg("rms_decay") = 0.95,
      py::arg("rms_epsilon") = 1e-4, py::arg("minibatch") = 100, py::arg("epochs") = 50,
      py::arg("seed") = 0, py::arg("patience") = 0, py::arg("threads") = 1,
      py::arg("init_scale") = 0.05, py::arg("val_mc_samples") = 5);

  m.def(
      "save_checkpoint",
      [](const std::string& path, const ModelParams& params, std::uint64_t rng_seed) {
        Checkpoint cp;
        cp.arch = params.arch;
        cp.params = params;
        cp.rng_seed = rng_seed;
        save_checkpoint(path, cp);
      },
      py::arg("path"), py::arg("params"), py::arg("rng_seed") = 0);
  m.def(
      "load_checkpoint",
      [](const std::string& path) { return load_checkpoint(path).params; }, py::arg("path"));
}
