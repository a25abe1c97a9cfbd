#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darn/data_io_fwd.hpp"
#include "darn/model.hpp"
#include "darn/rng.hpp"

namespace darn {

// Importance-sampling estimate of ln p(x) with a normal-approximation 95%
// confidence interval over independent repeats (nat-space convention:
// mean +- 1.96 sd/sqrt(repeats) of the per-repeat log estimates).
struct LikelihoodEstimate {
  double mean_nats = 0.0;  // mean ln p(x) over repeats (negative)
  int repeats = 0;
  long long samples_per_repeat = 0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::vector<double> per_repeat_values;
};

// Exact ln p(x) by log-sum-exp over every representation. Guarded to <= 20
// stochastic bits.
double exact_log_likelihood(const ModelParams& params, const Eigen::VectorXd& x);

// Per repeat: draws S encoder samples and averages p(x,h)/q(h|x) in log
// space (log-sum-exp of joint minus encoder log-probs, minus ln S).
LikelihoodEstimate importance_sampling_ll(const ModelParams& params, const Eigen::VectorXd& x,
                                          long long S, int repeats, RandomStream& rng);

enum class EvalMode { exact, importance, free_energy };

EvalMode parse_eval_mode(const std::string& name);  // "exact" / "is" / "fe"
std::string eval_mode_name(EvalMode mode);

// Dataset-level summary. mean_nats is reported as positive nats per datum:
// -ln p(x) for the likelihood modes, the expected description length for
// free_energy mode (its upper bound). The CI for importance mode is over
// per-repeat dataset means; exact/free_energy report a zero-width CI.
struct EvalSummary {
  double mean_nats = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  EvalMode mode = EvalMode::exact;
  long long S = 0;
  int repeats = 0;
  std::vector<double> per_datum;  // positive nats per datum
};

EvalSummary dataset_eval(const ModelParams& params, const Dataset& dataset, EvalMode mode,
                         long long S, int repeats, std::uint64_t seed, int threads = 1);

}  // namespace darn
