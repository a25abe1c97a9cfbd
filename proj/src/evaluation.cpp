#include "darn/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "darn/data_io.hpp"
#include "darn/enumeration.hpp"
#include "darn/mdl.hpp"
#include "darn/sampler.hpp"

namespace darn {
namespace {

// Streaming log-sum-exp with a running maximum.
class LogSumExp {
 public:
  void add(double v) {
    if (v <= m_) {
      s_ += std::exp(v - m_);
    } else {
      s_ = s_ * std::exp(m_ - v) + 1.0;
      m_ = v;
    }
  }
  double value() const { return m_ + std::log(s_); }

 private:
  double m_ = -std::numeric_limits<double>::infinity();
  double s_ = 0.0;
};

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void run_partitioned(Eigen::Index n, int threads, const std::function<void(Eigen::Index)>& fn) {
  if (threads <= 1 || n < 2) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<Eigen::Index> next{0};
  const int workers = std::min<Eigen::Index>(threads, n);
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (Eigen::Index i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

double exact_log_likelihood(const ModelParams& params, const Eigen::VectorXd& x) {
  if (params.arch.total_hidden() > kEnumerationGuardBits)
    throw EnumerationGuardError("exact_log_likelihood: " +
                                std::to_string(params.arch.total_hidden()) +
                                " stochastic bits exceed the enumeration guard of " +
                                std::to_string(kEnumerationGuardBits));
  LogSumExp lse;
  RepresentationEnumerator e(params, x);
  e.enumerate([&](const std::vector<Eigen::VectorXd>&, double, double log_p) { lse.add(log_p); });
  return lse.value();
}

LikelihoodEstimate importance_sampling_ll(const ModelParams& params, const Eigen::VectorXd& x,
                                          long long S, int repeats, RandomStream& rng) {
  if (S < 1) throw UsageError("importance_sampling_ll: S must be >= 1");
  if (repeats < 1) throw UsageError("importance_sampling_ll: repeats must be >= 1");
  LikelihoodEstimate est;
  est.repeats = repeats;
  est.samples_per_repeat = S;
  est.per_repeat_values.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    LogSumExp lse;
    for (long long s = 0; s < S; ++s) {
      const Representation rep = sample_encoder(params, x, rng);
      lse.add(joint_log_prob(params, x, rep) - encoder_log_prob(params, x, rep));
    }
    est.per_repeat_values.push_back(lse.value() - std::log(static_cast<double>(S)));
  }
  est.mean_nats = mean(est.per_repeat_values);
  const double half = 1.96 * sample_sd(est.per_repeat_values, est.mean_nats) /
                      std::sqrt(static_cast<double>(repeats));
  est.ci95_low = est.mean_nats - half;
  est.ci95_high = est.mean_nats + half;
  return est;
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "exact") return EvalMode::exact;
  if (name == "is") return EvalMode::importance;
  if (name == "fe") return EvalMode::free_energy;
  throw UsageError("unknown eval mode '" + name + "' (expected exact|is|fe)");
}

std::string eval_mode_name(EvalMode mode) {
  switch (mode) {
    case EvalMode::exact: return "exact";
    case EvalMode::importance: return "is";
    case EvalMode::free_energy: return "fe";
  }
  return "?";
}

EvalSummary dataset_eval(const ModelParams& params, const Dataset& dataset, EvalMode mode,
                         long long S, int repeats, std::uint64_t seed, int threads) {
  if (dataset.size() < 1) throw DataError("dataset_eval: empty dataset");
  if (dataset.width() != params.arch.n_x)
    throw DimensionError("dataset_eval: dataset width " + std::to_string(dataset.width()) +
                         " does not match n_x " + std::to_string(params.arch.n_x));
  if (mode == EvalMode::exact && params.arch.total_hidden() > kEnumerationGuardBits)
    throw EnumerationGuardError(
        "mode=exact needs <= " + std::to_string(kEnumerationGuardBits) +
        " stochastic bits (got " + std::to_string(params.arch.total_hidden()) +
        "); use mode=is");

  const Eigen::Index n = dataset.size();
  EvalSummary out;
  out.mode = mode;
  out.S = mode == EvalMode::exact ? 0 : S;
  out.repeats = mode == EvalMode::importance ? repeats : 1;
  out.per_datum.assign(n, 0.0);

  // Per-repeat dataset-level estimates (importance mode only).
  std::vector<std::vector<double>> repeat_matrix;
  if (mode == EvalMode::importance)
    repeat_matrix.assign(n, std::vector<double>(repeats, 0.0));

  const bool fe_exact = params.arch.total_hidden() <= kEnumerationGuardBits;
  run_partitioned(n, threads, [&](Eigen::Index i) {
    const Eigen::VectorXd x = dataset.row_vector(i);
    switch (mode) {
      case EvalMode::exact:
        out.per_datum[i] = -exact_log_likelihood(params, x);
        break;
      case EvalMode::importance: {
        RandomStream rs = RandomStream::substream(seed, static_cast<std::uint64_t>(i));
        const LikelihoodEstimate est = importance_sampling_ll(params, x, S, repeats, rs);
        out.per_datum[i] = -est.mean_nats;
        for (int r = 0; r < repeats; ++r) repeat_matrix[i][r] = est.per_repeat_values[r];
        break;
      }
      case EvalMode::free_energy: {
        if (fe_exact) {
          out.per_datum[i] = free_energy_exact(params, x);
        } else {
          RandomStream rs = RandomStream::substream(seed, static_cast<std::uint64_t>(i));
          out.per_datum[i] = free_energy_mc(params, x, static_cast<int>(S), rs);
        }
        break;
      }
    }
  });

  out.mean_nats = mean(out.per_datum);
  if (mode == EvalMode::importance && repeats >= 2) {
    std::vector<double> repeat_means(repeats, 0.0);
    for (int r = 0; r < repeats; ++r) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += -repeat_matrix[i][r];
      repeat_means[r] = s / static_cast<double>(n);
    }
    const double m = mean(repeat_means);
    const double half =
        1.96 * sample_sd(repeat_means, m) / std::sqrt(static_cast<double>(repeats));
    out.mean_nats = m;  // keeps ci_low <= mean <= ci_high exact
    out.ci_low = m - half;
    out.ci_high = m + half;
  } else {
    out.ci_low = out.mean_nats;
    out.ci_high = out.mean_nats;
  }
  return out;
}

}  // namespace darn
