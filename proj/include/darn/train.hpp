#pragma once

#include <vector>

#include "darn/data_io_fwd.hpp"
#include "darn/optimizer.hpp"

namespace darn {

struct TrainLogEntry {
  int epoch = 0;
  double train_nats = 0.0;
  double val_nats = 0.0;  // NaN when no validation set was given
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams params;  // best-validation parameters (final when no val set)
  std::vector<TrainLogEntry> log;
  int best_epoch = 0;
  double best_val = 0.0;
};

// Minibatch training: per datum an encoder sample and a single-sample
// stochastic gradient, averaged over the minibatch, applied with RMSprop.
// Logs the mean description length per epoch on train and validation and
// keeps the parameters with the best validation objective (early stopping
// after `early_stop_patience` epochs without improvement when set).
TrainResult train(const Dataset& train_data, const Architecture& arch, const TrainConfig& cfg,
                  const Dataset* validation = nullptr);

}  // namespace darn
