#pragma once

// Unsupervised training of unfolded schedules: mini-batch losses, central
// finite-difference gradients, Adam, and incremental depth training.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcast/hermitian.hpp"
#include "mcast/objectives.hpp"
#include "mcast/unfolded.hpp"

namespace mcast {

enum class Algorithm { kDuPocs, kDuPocsBp };

std::string to_string(Algorithm a);
/// Accepts "du_pocs" and "du_pocs_bp"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(const std::string& name);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  friend bool operator==(const AdamHyper&, const AdamHyper&) = default;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::kDuPocsBp;
  SystemConfig problem;
  /// Power half-space bound; required for DU-POCS, unused by DU-POCS-BP.
  std::optional<double> power_bound;
  std::size_t depth = 1;
  double learning_rate = 0.003;
  std::size_t n_batches = 1000;
  std::size_t batch_size = 30;
  double fd_step = 1e-4;
  double softmin_beta = kDefaultSoftminBeta;
  double init_lambda = 1.0;
  double init_beta = 0.9486832980505138;  // sqrt(0.9)
  std::uint64_t seed = 0;
  bool incremental = false;
  AdamHyper adam;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Threshold-power feasibility problem: N=5, K=15, gamma=1, P=0.5, T=20,
/// 1000 batches of 30.
TrainConfig du_pocs_reference_config();
/// N=8, K=12, T=15, incremental, 200 batches of 10.
TrainConfig du_pocs_bp_desk_config();
/// N=30, K=20, T=35, incremental, 1000 batches of 30. Long running.
TrainConfig du_pocs_bp_paper_config(std::size_t n_users = 20);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  AdamHyper hyper;

  AdamState() = default;
  explicit AdamState(std::size_t n, AdamHyper h = {}) : m(n, 0.0), v(n, 0.0), hyper(h) {}
};

/// Bias-corrected Adam update of params in place. Throws
/// std::invalid_argument on length mismatch.
void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grad, double lr);

using LossFn = std::function<double(std::span<const double>)>;

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h. With workers > 1
/// the 2n evaluations run concurrently, so loss must be safe to call from
/// several threads. Throws std::domain_error on a non-finite evaluation.
std::vector<double> fd_grad(const LossFn& loss, std::span<const double> params, double h,
                            std::size_t workers = 1);

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::uint64_t sample_seed)
      : std::runtime_error(what + " (sample seed " + std::to_string(sample_seed) + ")"),
        sample_seed_(sample_seed) {}
  std::uint64_t sample_seed() const { return sample_seed_; }

 private:
  std::uint64_t sample_seed_;
};

/// Channels of sample `index` in the training stream of stage `depth`.
ChannelSet training_channels(const TrainConfig& cfg, std::size_t depth, std::uint64_t index);
/// Held-out realization r; the evaluation stream is disjoint from training.
ChannelSet heldout_channels(const SystemConfig& problem, std::uint64_t seed, std::uint64_t r);

/// Mini-batch loss of an unfolded algorithm as a function of its trainable
/// parameters. For DU-POCS the parameters are (lambda_1..lambda_d); for
/// DU-POCS-BP they are (lambda_1..lambda_d, beta_1..beta_d).
class BatchObjective {
 public:
  BatchObjective(const TrainConfig& cfg, std::vector<ChannelSet> batch,
                 std::vector<std::uint64_t> sample_seeds);

  std::size_t size() const { return batch_.size(); }

  /// Mean loss over the batch, summed in sample order.
  double loss(std::span<const double> params) const;

  /// Same values as fd_grad(loss, params, h) but reuses the unperturbed
  /// prefix of each trajectory: a change to iteration j's parameters only
  /// re-runs iterations j..d.
  std::vector<double> fd_gradient(std::span<const double> params, double h, std::size_t workers,
                                   double* center_loss = nullptr) const;

 private:
  TrainConfig cfg_;
  std::vector<ChannelSet> batch_;
  std::vector<FeasibilitySpec> specs_;
  std::vector<std::uint64_t> seeds_;
};

struct TrainLogEntry {
  std::size_t depth = 0;
  std::size_t batch_index = 0;
  double mean_loss = 0.0;
  double wall_time_ms = 0.0;
};

struct TrainOptions {
  std::size_t workers = 1;
  std::function<void(const TrainLogEntry&)> on_batch;
};

struct TrainResult {
  UnfoldedSchedule schedule;
  std::vector<TrainLogEntry> log;
};

/// Trains lambda_1..lambda_T of relaxed POCS against the feasibility loss of
/// X_T. beta of the returned schedule is all zeros.
TrainResult train_du_pocs(const TrainConfig& cfg, const TrainOptions& options = {});
/// Trains (lambda_t, beta_t) against the softmin MMF loss of w_d; with
/// cfg.incremental, depth grows 1..T and each stage starts from the
/// previous stage's values.
TrainResult train_du_pocs_bp(const TrainConfig& cfg, const TrainOptions& options = {});
/// Dispatches on cfg.algorithm.
TrainResult train(const TrainConfig& cfg, const TrainOptions& options = {});

}  // namespace mcast
