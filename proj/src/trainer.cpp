#include "mcast/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mcast/parallel.hpp"
#include "mcast/projections.hpp"

namespace mcast {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kDuPocs:
      return "du_pocs";
    case Algorithm::kDuPocsBp:
      return "du_pocs_bp";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "du_pocs") return Algorithm::kDuPocs;
  if (name == "du_pocs_bp") return Algorithm::kDuPocsBp;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void TrainConfig::validate() const {
  problem.validate();
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(fd_step > 0.0) || !std::isfinite(fd_step)) throw std::invalid_argument("fd_step must be positive");
  if (!std::isfinite(softmin_beta)) throw std::invalid_argument("softmin_beta must be finite");
  if (!std::isfinite(init_lambda) || !std::isfinite(init_beta)) {
    throw std::invalid_argument("initial parameters must be finite");
  }
  if (power_bound && !(*power_bound > 0.0)) throw std::invalid_argument("power_bound must be positive");
  if (algorithm == Algorithm::kDuPocs && !power_bound) {
    throw std::invalid_argument("du_pocs requires power_bound");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
      !(adam.eps > 0.0)) {
    throw std::invalid_argument("invalid Adam hyperparameters");
  }
}

TrainConfig du_pocs_reference_config() {
  TrainConfig cfg;
  cfg.algorithm = Algorithm::kDuPocs;
  cfg.problem = SystemConfig{5, 15, 1.0, 1.0};
  cfg.power_bound = 0.5;
  cfg.depth = 20;
  cfg.learning_rate = 0.003;
  cfg.n_batches = 1000;
  cfg.batch_size = 30;
  cfg.init_lambda = 1.0;
  cfg.init_beta = 0.0;
  cfg.seed = 1;
  return cfg;
}

TrainConfig du_pocs_bp_desk_config() {
  TrainConfig cfg;
  cfg.algorithm = Algorithm::kDuPocsBp;
  cfg.problem = SystemConfig{8, 12, 1.0, 1.0};
  cfg.depth = 15;
  cfg.n_batches = 200;
  cfg.batch_size = 10;
  cfg.incremental = true;
  cfg.seed = 1;
  return cfg;
}

TrainConfig du_pocs_bp_paper_config(std::size_t n_users) {
  TrainConfig cfg = du_pocs_bp_desk_config();
  cfg.problem = SystemConfig{30, n_users, 1.0, 1.0};
  cfg.depth = 35;
  cfg.n_batches = 1000;
  cfg.batch_size = 30;
  return cfg;
}

void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> grad, double lr) {
  if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: length mismatch");
  }
  const AdamHyper& h = state.hyper;
  ++state.step;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * grad[i];
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

std::vector<double> fd_grad(const LossFn& loss, std::span<const double> params, double h,
                            std::size_t workers) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_grad: step must be positive");
  const std::size_t n = params.size();
  std::vector<double> values(2 * n);
  parallel_for(2 * n, workers, [&](std::size_t task) {
    const std::size_t i = task / 2;
    std::vector<double> p(params.begin(), params.end());
    p[i] = (task % 2 == 0) ? params[i] + h : params[i] - h;
    const double f = loss(p);
    if (!std::isfinite(f)) {
      throw std::domain_error("fd_grad: non-finite loss at coordinate " + std::to_string(i));
    }
    values[task] = f;
  });
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = (values[2 * i] - values[2 * i + 1]) / (2.0 * h);
  return grad;
}

namespace {

std::uint64_t training_seed(const TrainConfig& cfg, std::size_t depth, std::uint64_t index) {
  const std::uint64_t stage = derive_seed(cfg.seed, StreamDomain::kTraining, depth);
  return derive_seed(stage, StreamDomain::kTraining, index);
}

}  // namespace

ChannelSet training_channels(const TrainConfig& cfg, std::size_t depth, std::uint64_t index) {
  return sample_channels(cfg.problem, training_seed(cfg, depth, index));
}

ChannelSet heldout_channels(const SystemConfig& problem, std::uint64_t seed, std::uint64_t r) {
  return sample_channels(problem, derive_seed(seed, StreamDomain::kEvaluation, r));
}

namespace {

struct ParamView {
  std::size_t depth;
  std::span<const double> lambda;
  std::span<const double> beta;  // empty for DU-POCS
};

ParamView split(const TrainConfig& cfg, std::span<const double> params) {
  if (cfg.algorithm == Algorithm::kDuPocs) return {params.size(), params, {}};
  if (params.size() % 2 != 0) throw std::invalid_argument("DU-POCS-BP parameters must have even length");
  const std::size_t d = params.size() / 2;
  return {d, params.subspan(0, d), params.subspan(d)};
}

// Parameter override for one iteration: (iteration index, which list, value).
struct Override {
  std::size_t iteration;
  bool is_beta;
  double value;
};

double lambda_at(const ParamView& p, std::size_t t, const Override* o) {
  return (o != nullptr && !o->is_beta && o->iteration == t) ? o->value : p.lambda[t];
}

double beta_at(const ParamView& p, std::size_t t, const Override* o) {
  return (o != nullptr && o->is_beta && o->iteration == t) ? o->value : p.beta[t];
}

double finish_pocs(HermitianMatrix x, const FeasibilitySpec& spec, const ParamView& p, std::size_t from,
                   const Override* o) {
  for (std::size_t t = from; t < p.depth; ++t) pocs_sweep_inplace(x, spec, lambda_at(p, t, o));
  return feasibility_loss(x, spec);
}

double finish_bp(BpState st, const FeasibilitySpec& spec, const ChannelSet& channels, double softmin_beta,
                 const ParamView& p, std::size_t from, const Override* o) {
  for (std::size_t t = from; t < p.depth; ++t) bp_step(st, spec, lambda_at(p, t, o), beta_at(p, t, o));
  return mmf_loss(st.pair.vector, channels, SoftminWeight{softmin_beta});
}

}  // namespace

BatchObjective::BatchObjective(const TrainConfig& cfg, std::vector<ChannelSet> batch,
                               std::vector<std::uint64_t> sample_seeds)
    : cfg_(cfg), batch_(std::move(batch)), seeds_(std::move(sample_seeds)) {
  if (batch_.empty()) throw std::invalid_argument("BatchObjective: empty batch");
  if (seeds_.size() != batch_.size()) throw std::invalid_argument("BatchObjective: seed count mismatch");
  const std::optional<double> power =
      cfg_.algorithm == Algorithm::kDuPocs ? cfg_.power_bound : std::optional<double>{};
  specs_.reserve(batch_.size());
  for (const ChannelSet& c : batch_) specs_.push_back(make_spec(c, power));
}

double BatchObjective::loss(std::span<const double> params) const {
  const ParamView p = split(cfg_, params);
  double sum = 0.0;
  for (std::size_t i = 0; i < batch_.size(); ++i) {
    const HermitianMatrix x0 = HermitianMatrix::zero(cfg_.problem.n_antennas);
    const double l = cfg_.algorithm == Algorithm::kDuPocs
                         ? finish_pocs(x0, specs_[i], p, 0, nullptr)
                         : finish_bp(bp_initial_state(x0), specs_[i], batch_[i], cfg_.softmin_beta, p, 0,
                                     nullptr);
    if (!std::isfinite(l)) throw TrainingError("non-finite training loss", seeds_[i]);
    sum += l;
  }
  return sum / static_cast<double>(batch_.size());
}

std::vector<double> BatchObjective::fd_gradient(std::span<const double> params, double h,
                                                std::size_t workers, double* center_loss) const {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  const ParamView p = split(cfg_, params);
  const bool bp = cfg_.algorithm == Algorithm::kDuPocsBp;
  const std::size_t n_samples = batch_.size();
  const std::size_t d = p.depth;

  // Unperturbed trajectories: state before each iteration, plus the loss.
  std::vector<std::vector<HermitianMatrix>> pocs_states(bp ? 0 : n_samples);
  std::vector<std::vector<BpState>> bp_states(bp ? n_samples : 0);
  std::vector<double> center(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i) {
    HermitianMatrix x = HermitianMatrix::zero(cfg_.problem.n_antennas);
    if (bp) {
      BpState st = bp_initial_state(x);
      auto& states = bp_states[i];
      states.reserve(d);
      for (std::size_t t = 0; t < d; ++t) {
        states.push_back(st);
        bp_step(st, specs_[i], p.lambda[t], p.beta[t]);
      }
      center[i] = mmf_loss(st.pair.vector, batch_[i], SoftminWeight{cfg_.softmin_beta});
    } else {
      auto& states = pocs_states[i];
      states.reserve(d);
      for (std::size_t t = 0; t < d; ++t) {
        states.push_back(x);
        pocs_sweep_inplace(x, specs_[i], p.lambda[t]);
      }
      center[i] = feasibility_loss(x, specs_[i]);
    }
    if (!std::isfinite(center[i])) throw TrainingError("non-finite training loss", seeds_[i]);
  });
  if (center_loss != nullptr) {
    double sum = 0.0;
    for (double c : center) sum += c;
    *center_loss = sum / static_cast<double>(n_samples);
  }

  const std::size_t n = params.size();
  std::vector<double> values(2 * n);
  parallel_for(2 * n, workers, [&](std::size_t task) {
    const std::size_t coord = task / 2;
    const double shifted = (task % 2 == 0) ? params[coord] + h : params[coord] - h;
    const Override o{coord % d, bp && coord >= d, shifted};
    double sum = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const double l = bp ? finish_bp(bp_states[i][o.iteration], specs_[i], batch_[i], cfg_.softmin_beta, p,
                                      o.iteration, &o)
                          : finish_pocs(pocs_states[i][o.iteration], specs_[i], p, o.iteration, &o);
      if (!std::isfinite(l)) throw TrainingError("non-finite training loss", seeds_[i]);
      sum += l;
    }
    values[task] = sum / static_cast<double>(n_samples);
  });

  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = (values[2 * i] - values[2 * i + 1]) / (2.0 * h);
  return grad;
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs the stage loop shared by both algorithms. `pack(d)` extracts the
// trainable vector for depth d from the schedule, `unpack(d, v)` writes it
// back; entries beyond depth d are never touched.
template <class Pack, class Unpack>
std::vector<TrainLogEntry> run_stages(const TrainConfig& cfg, const TrainOptions& options, Pack pack,
                                      Unpack unpack) {
  std::vector<TrainLogEntry> log;
  const auto start = Clock::now();
  const std::size_t first = cfg.incremental ? 1 : cfg.depth;
  for (std::size_t d = first; d <= cfg.depth; ++d) {
    std::vector<double> params = pack(d);
    AdamState adam(params.size(), cfg.adam);
    for (std::size_t b = 0; b < cfg.n_batches; ++b) {
      std::vector<ChannelSet> batch;
      std::vector<std::uint64_t> seeds;
      batch.reserve(cfg.batch_size);
      seeds.reserve(cfg.batch_size);
      for (std::size_t i = 0; i < cfg.batch_size; ++i) {
        const std::uint64_t s = training_seed(cfg, d, b * cfg.batch_size + i);
        batch.push_back(sample_channels(cfg.problem, s));
        seeds.push_back(s);
      }
      const std::uint64_t first_seed = seeds.front();
      const BatchObjective objective(cfg, std::move(batch), std::move(seeds));
      double mean_loss = 0.0;
      const std::vector<double> grad = objective.fd_gradient(params, cfg.fd_step, options.workers, &mean_loss);
      adam_step(adam, params, grad, cfg.learning_rate);
      for (double v : params) {
        if (!std::isfinite(v)) throw TrainingError("non-finite parameter after update", first_seed);
      }
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      log.push_back(TrainLogEntry{d, b, mean_loss, ms});
      if (options.on_batch) options.on_batch(log.back());
    }
    unpack(d, params);
  }
  return log;
}

}  // namespace

TrainResult train_du_pocs(const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (cfg.algorithm != Algorithm::kDuPocs) throw std::invalid_argument("train_du_pocs: algorithm mismatch");
  UnfoldedSchedule schedule = UnfoldedSchedule::constant(cfg.depth, cfg.init_lambda, 0.0);
  auto pack = [&](std::size_t d) { return std::vector<double>(schedule.lambda.begin(), schedule.lambda.begin() + d); };
  auto unpack = [&](std::size_t d, const std::vector<double>& v) {
    std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d), schedule.lambda.begin());
  };
  std::vector<TrainLogEntry> log = run_stages(cfg, options, pack, unpack);
  return TrainResult{std::move(schedule), std::move(log)};
}

TrainResult train_du_pocs_bp(const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (cfg.algorithm != Algorithm::kDuPocsBp) {
    throw std::invalid_argument("train_du_pocs_bp: algorithm mismatch");
  }
  UnfoldedSchedule schedule = UnfoldedSchedule::constant(cfg.depth, cfg.init_lambda, cfg.init_beta);
  auto pack = [&](std::size_t d) {
    std::vector<double> v(schedule.lambda.begin(), schedule.lambda.begin() + d);
    v.insert(v.end(), schedule.beta.begin(), schedule.beta.begin() + d);
    return v;
  };
  auto unpack = [&](std::size_t d, const std::vector<double>& v) {
    for (std::size_t t = 0; t < d; ++t) {
      schedule.lambda[t] = v[t];
      schedule.beta[t] = v[d + t];
    }
  };
  std::vector<TrainLogEntry> log = run_stages(cfg, options, pack, unpack);
  return TrainResult{std::move(schedule), std::move(log)};
}

TrainResult train(const TrainConfig& cfg, const TrainOptions& options) {
  return cfg.algorithm == Algorithm::kDuPocs ? train_du_pocs(cfg, options) : train_du_pocs_bp(cfg, options);
}

}  // namespace mcast
