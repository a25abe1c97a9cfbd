#include "darn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "darn/data_io.hpp"
#include "darn/gradients.hpp"
#include "darn/mdl.hpp"
#include "darn/sampler.hpp"

namespace darn {
namespace {

// Stream ids: disjoint tags keep shuffling, per-datum sampling and
// validation draws decorrelated under one user seed.
constexpr std::uint64_t kShuffleTag = 0x1000000000000000ULL;
constexpr std::uint64_t kValTag = 0x2000000000000000ULL;

void seeded_shuffle(std::vector<Eigen::Index>& order, RandomStream& rs) {
  for (Eigen::Index i = static_cast<Eigen::Index>(order.size()) - 1; i > 0; --i) {
    const Eigen::Index j = static_cast<Eigen::Index>(rs.uniform01() * (i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
}

double validation_nats(const ModelParams& params, const Dataset& val, int mc_samples,
                       std::uint64_t seed, int epoch) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < val.size(); ++i) {
    RandomStream rs = RandomStream::substream(
        seed, kValTag ^ (static_cast<std::uint64_t>(epoch) << 32) ^ static_cast<std::uint64_t>(i));
    total += free_energy_mc(params, val.row_vector(i), mc_samples, rs);
  }
  return total / static_cast<double>(val.size());
}

}  // namespace

TrainResult train(const Dataset& train_data, const Architecture& arch, const TrainConfig& cfg,
                  const Dataset* validation) {
  cfg.validate();
  arch.validate();
  if (train_data.size() == 0) throw DataError("train: empty dataset");
  if (train_data.width() != arch.n_x)
    throw DimensionError("train: dataset width " + std::to_string(train_data.width()) +
                         " does not match n_x " + std::to_string(arch.n_x));
  for (Eigen::Index i = 0; i < train_data.size(); ++i)
    for (Eigen::Index j = 0; j < train_data.width(); ++j)
      if (train_data.rows(i, j) > 1) throw DataError("train: non-binary dataset entry");
  if (validation && validation->width() != arch.n_x)
    throw DimensionError("train: validation width does not match n_x");

  ModelParams params = init_params(arch, cfg.seed, cfg.init_scale);
  RmsPropState opt = make_rmsprop_state(arch);

  TrainResult result;
  result.params = params;
  result.best_val = std::numeric_limits<double>::infinity();
  result.best_epoch = 0;

  const Eigen::Index n = train_data.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t datum_counter = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    RandomStream shuffle_rs = RandomStream::substream(cfg.seed, kShuffleTag ^ epoch);
    seeded_shuffle(order, shuffle_rs);

    double epoch_cost = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.minibatch) {
      const Eigen::Index batch = std::min<Eigen::Index>(cfg.minibatch, n - start);
      GradientSet acc = zeros_like(arch);

      if (cfg.threads <= 1) {
        for (Eigen::Index k = 0; k < batch; ++k) {
          const Eigen::VectorXd x = train_data.row_vector(order[start + k]);
          RandomStream rs = RandomStream::substream(cfg.seed, datum_counter + k);
          const Representation rep = sample_encoder(params, x, rs);
          const SampleGradient sg = backward_sample(params, x, rep);
          gs_axpy(acc, 1.0, sg.grads);
          epoch_cost += sg.cost.total;
        }
      } else {
        // Contiguous chunks, each accumulated serially, combined in chunk
        // order: deterministic for a fixed thread count.
        const int workers = static_cast<int>(std::min<Eigen::Index>(cfg.threads, batch));
        std::vector<GradientSet> partial(workers, zeros_like(arch));
        std::vector<double> partial_cost(workers, 0.0);
        std::vector<std::thread> pool;
        const Eigen::Index chunk = (batch + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            const Eigen::Index lo = w * chunk;
            const Eigen::Index hi = std::min<Eigen::Index>(batch, lo + chunk);
            for (Eigen::Index k = lo; k < hi; ++k) {
              const Eigen::VectorXd x = train_data.row_vector(order[start + k]);
              RandomStream rs = RandomStream::substream(cfg.seed, datum_counter + k);
              const Representation rep = sample_encoder(params, x, rs);
              const SampleGradient sg = backward_sample(params, x, rep);
              gs_axpy(partial[w], 1.0, sg.grads);
              partial_cost[w] += sg.cost.total;
            }
          });
        }
        for (auto& th : pool) th.join();
        for (int w = 0; w < workers; ++w) {
          gs_axpy(acc, 1.0, partial[w]);
          epoch_cost += partial_cost[w];
        }
      }
      datum_counter += static_cast<std::uint64_t>(batch);

      gs_scale(acc, 1.0 / static_cast<double>(batch));
      rmsprop_step(params, opt, acc, cfg);
    }

    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_nats = epoch_cost / static_cast<double>(n);
    entry.val_nats = validation
                         ? validation_nats(params, *validation, cfg.val_mc_samples, cfg.seed, epoch)
                         : std::numeric_limits<double>::quiet_NaN();
    entry.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(entry);

    const double objective = validation ? entry.val_nats : entry.train_nats;
    if (objective < result.best_val) {
      result.best_val = objective;
      result.best_epoch = epoch;
      result.params = params;
    }
    if (cfg.early_stop_patience > 0 && epoch - result.best_epoch >= cfg.early_stop_patience)
      break;
  }
  return result;
}

}  // namespace darn
