// mcast: train, evaluate and compare unfolded multicast beamforming schedules.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "mcast/baselines.hpp"
#include "mcast/checkpoint.hpp"
#include "mcast/objectives.hpp"
#include "mcast/parallel.hpp"
#include "mcast/trainer.hpp"
#include "mcast/unfolded.hpp"

namespace {

using namespace mcast;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConfigUnreadable = 3,
  kConfigSchema = 4,
  kCheckpointUnreadable = 5,
  kCheckpointInvalid = 6,
  kOutputUnwritable = 7,
  kNonFinite = 8,
  kIncompatible = 9,
  kInternal = 10,
};

const char* code_name(int code) {
  switch (code) {
    case kUsage: return "usage";
    case kConfigUnreadable: return "config_unreadable";
    case kConfigSchema: return "config_schema";
    case kCheckpointUnreadable: return "checkpoint_unreadable";
    case kCheckpointInvalid: return "checkpoint_invalid";
    case kOutputUnwritable: return "output_unwritable";
    case kNonFinite: return "non_finite";
    case kIncompatible: return "incompatible_inputs";
    default: return "internal";
  }
}

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

// One line on stderr: error code=<name> exit=<n> message="<escaped text>"
int report(int code, const std::string& message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped.push_back('\\');
    escaped.push_back(c == '\n' ? ' ' : c);
  }
  std::cerr << "error code=" << code_name(code) << " exit=" << code << " message=\"" << escaped << "\"\n";
  return code;
}

TrainConfig read_config(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    throw CliError(e.kind() == ConfigError::Kind::kUnreadable ? kConfigUnreadable : kConfigSchema, e.what());
  }
}

Checkpoint read_checkpoint(const std::string& path) {
  try {
    return load_checkpoint(path);
  } catch (const CheckpointError& e) {
    throw CliError(e.kind() == CheckpointError::Kind::kIo ? kCheckpointUnreadable : kCheckpointInvalid, e.what());
  }
}

std::string provenance(const TrainConfig& cfg, std::uint64_t seed, const std::string& extra = {}) {
  std::string line = "# mcast " MCAST_VERSION " config_sha256=" + sha256_hex(config_to_json(cfg)) +
                     " seed=" + std::to_string(seed);
  if (!extra.empty()) line += " " + extra;
  return line + "\n";
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw CliError(kNonFinite, "non-finite value in " + what);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError(kOutputUnwritable, "cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw CliError(kOutputUnwritable, "write failed for " + path);
}

// Iteration-by-iteration parameters over a horizon: the schedule itself,
// then its last entry held.
UnfoldedSchedule extend(const UnfoldedSchedule& s, std::size_t horizon) {
  UnfoldedSchedule out = s.prefix(std::min(horizon, s.depth()));
  while (out.depth() < horizon) {
    out.lambda.push_back(s.lambda.back());
    out.beta.push_back(s.beta.back());
  }
  return out;
}

std::vector<double> snr_db_trace(const IterateTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const IterateRecord& r : trace.records) out.push_back(r.min_snr_db);
  return out;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string out;
  std::string log;
  std::size_t workers = 1;
  bool timing = true;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = read_config(a.config);
  const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
  TrainOptions opts;
  opts.workers = a.workers;
  std::size_t last_depth = 0;
  if (!a.quiet) {
    opts.on_batch = [&](const TrainLogEntry& e) {
      if (e.batch_index + 1 == cfg.n_batches && e.depth != last_depth) {
        last_depth = e.depth;
        std::cerr << "depth " << e.depth << "/" << cfg.depth << " loss " << e.mean_loss << "\n";
      }
    };
  }
  TrainResult result;
  try {
    result = train(cfg, opts);
  } catch (const TrainingError& e) {
    throw CliError(kNonFinite, e.what());
  }
  for (std::size_t t = 0; t < result.schedule.depth(); ++t) {
    require_finite(result.schedule.lambda[t], "trained lambda");
    require_finite(result.schedule.beta[t], "trained beta");
  }
  std::vector<TrainLogEntry> log = result.log;
  for (TrainLogEntry& e : log) {
    require_finite(e.mean_loss, "training log");
    if (!a.timing) e.wall_time_ms = 0.0;
  }
  try {
    save_checkpoint(a.out, Checkpoint{result.schedule, cfg});
  } catch (const CheckpointError& e) {
    throw CliError(kOutputUnwritable, e.what());
  }
  std::ostringstream text;
  text << provenance(cfg, cfg.seed);
  write_train_log(text, log);
  write_text(log_path, text.str());
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::size_t realizations = 50;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t iterations = 0;
  std::size_t workers = 1;
};

struct EvalRow {
  std::size_t realization;
  int iteration;
  double loss;
  double snr_db;
};

// Runs the checkpointed algorithm on one held-out realization.
IterateTrace run_trained(const Checkpoint& ckpt, const ChannelSet& ch, std::size_t horizon) {
  const UnfoldedSchedule s = extend(ckpt.schedule, horizon);
  const std::size_t n = ch.n_antennas();
  if (ckpt.config.algorithm == Algorithm::kDuPocs) {
    const FeasibilitySpec spec = make_spec(ch, ckpt.config.power_bound);
    return run_pocs(HermitianMatrix::zero(n), spec, s.lambda, PocsOptions{.track_snr = &ch}).trace;
  }
  return run_pocs_bp(ch, s).trace;
}

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ckpt = read_checkpoint(a.checkpoint);
  const std::size_t horizon = a.iterations == 0 ? ckpt.schedule.depth() : a.iterations;
  std::vector<std::vector<EvalRow>> per(a.realizations);
  parallel_for(a.realizations, a.workers, [&](std::size_t r) {
    const ChannelSet ch = heldout_channels(ckpt.config.problem, a.seed, r);
    for (const IterateRecord& rec : run_trained(ckpt, ch, horizon).records) {
      per[r].push_back(EvalRow{r, rec.iteration, rec.feasibility_loss, rec.min_snr_db});
    }
  });
  std::ostringstream text;
  text << provenance(ckpt.config, a.seed) << "realization,iteration,feasibility_loss,min_snr_db\n";
  for (const auto& rows : per) {
    for (const EvalRow& row : rows) {
      require_finite(row.loss, "feasibility_loss");
      require_finite(row.snr_db, "min_snr_db");
      text << row.realization << ',' << row.iteration << ',' << format_double(row.loss) << ','
           << format_double(row.snr_db) << '\n';
    }
  }
  write_text(a.out, text.str());
  return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::size_t realizations = 50;
  std::optional<std::uint64_t> seed;
  std::size_t iterations = 200;
  std::size_t rand_samples = 5000;
  double bound_tol = 1e-3;
  int bound_iter_cap = 2000;
  std::size_t workers = 1;
};

struct CompareRow {
  std::size_t realization;
  int iteration;
  std::string method;
  double value_db;

  auto key() const { return std::tie(realization, iteration, method); }
};

std::string trained_method(const TrainConfig& cfg) { return "trained_" + to_string(cfg.algorithm); }

int cmd_compare(const CompareArgs& a) {
  const TrainConfig cfg = read_config(a.config);
  const Checkpoint ckpt = read_checkpoint(a.checkpoint);
  if (!(ckpt.config.problem == cfg.problem)) {
    throw CliError(kIncompatible, "checkpoint was trained for a different (N, K, gamma, sigma)");
  }
  if (a.iterations < 1 || a.rand_samples < 1 || !(a.bound_tol > 0.0) || a.bound_iter_cap < 1) {
    throw CliError(kUsage, "iterations, rand-samples, bound-tol and bound-iter-cap must be positive");
  }
  const std::uint64_t seed = a.seed.value_or(cfg.seed);
  const std::size_t n = cfg.problem.n_antennas;

  std::vector<std::vector<CompareRow>> per(a.realizations);
  parallel_for(a.realizations, a.workers, [&](std::size_t r) {
    const ChannelSet ch = heldout_channels(cfg.problem, seed, r);
    auto add_trace = [&](const std::string& method, const std::vector<double>& db) {
      for (std::size_t t = 0; t < db.size(); ++t) per[r].push_back({r, static_cast<int>(t + 1), method, db[t]});
    };
    add_trace(trained_method(ckpt.config), snr_db_trace(run_trained(ckpt, ch, a.iterations)));
    add_trace("pocs_bp_reference", snr_db_trace(run_pocs_bp(ch, reference_schedule(a.iterations)).trace));
    const FeasibilitySpec spec = make_spec(ch, cfg.algorithm == Algorithm::kDuPocs ? cfg.power_bound : std::nullopt);
    for (double lambda : {1.9, 1.0}) {
      const std::vector<double> lambdas(a.iterations, lambda);
      const PocsResult p = run_pocs(HermitianMatrix::zero(n), spec, lambdas, PocsOptions{.track_snr = &ch});
      add_trace(lambda == 1.9 ? "pocs_fixed_1.9" : "pocs_fixed_1.0", snr_db_trace(p.trace));
    }
    const SdpBoundEstimate bound = sdp_bound_estimate(ch, a.bound_tol, a.bound_iter_cap);
    const ComplexVec w = rand_a(bound.x, ch, a.rand_samples, derive_seed(seed, StreamDomain::kRandomization, r));
    per[r].push_back({r, 0, "rand_a_sdp", to_db(min_snr(w, ch))});
    per[r].push_back({r, 0, "sdp_bound", to_db(bound.bound)});
    std::sort(per[r].begin(), per[r].end(), [](const CompareRow& x, const CompareRow& y) { return x.key() < y.key(); });
  });

  std::ostringstream extra;
  extra << "bound_tol=" << format_double(a.bound_tol) << " bound_iter_cap=" << a.bound_iter_cap
        << " rand_samples=" << a.rand_samples;
  std::ostringstream text;
  text << provenance(cfg, seed, extra.str()) << "realization,iteration,method,value_db\n";
  for (const auto& rows : per) {
    for (const CompareRow& row : rows) {
      require_finite(row.value_db, row.method);
      text << row.realization << ',' << row.iteration << ',' << row.method << ',' << format_double(row.value_db)
           << '\n';
    }
  }
  write_text(a.out, text.str());
  return kOk;
}

// ---------------------------------------------------------------- sweep-beta

struct SweepArgs {
  std::string config;
  std::vector<double> betas;
  std::string out;
  std::size_t realizations = 50;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
};

int cmd_sweep(const SweepArgs& a) {
  const TrainConfig base = read_config(a.config);
  if (base.algorithm != Algorithm::kDuPocsBp) {
    throw CliError(kIncompatible, "sweep-beta needs a du_pocs_bp config; du_pocs has no softmin weight");
  }
  std::vector<double> betas = a.betas;
  for (double b : betas) {
    if (!std::isfinite(b) || b < 0.0) throw CliError(kUsage, "betas must be finite and non-negative");
  }
  std::sort(betas.begin(), betas.end());
  const std::uint64_t seed = a.seed.value_or(base.seed);

  std::ostringstream text;
  text << provenance(base, seed) << "softmin_beta,realization,min_snr_db\n";
  for (double beta : betas) {
    TrainConfig cfg = base;
    cfg.softmin_beta = beta;
    UnfoldedSchedule schedule;
    try {
      schedule = train(cfg, TrainOptions{.workers = a.workers, .on_batch = {}}).schedule;
    } catch (const TrainingError& e) {
      throw CliError(kNonFinite, e.what());
    }
    std::vector<double> db(a.realizations);
    parallel_for(a.realizations, a.workers, [&](std::size_t r) {
      const ChannelSet ch = heldout_channels(cfg.problem, seed, r);
      db[r] = to_db(min_snr(run_pocs_bp(ch, schedule).w, ch));
    });
    for (std::size_t r = 0; r < db.size(); ++r) {
      require_finite(db[r], "min_snr_db");
      text << format_double(beta) << ',' << r << ',' << format_double(db[r]) << '\n';
    }
  }
  write_text(a.out, text.str());
  return kOk;
}

// ---------------------------------------------------------------- show

int cmd_show(const std::string& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  std::cout << provenance(ckpt.config, ckpt.config.seed) << "t,lambda,beta\n";
  for (std::size_t t = 0; t < ckpt.schedule.depth(); ++t) {
    std::cout << t + 1 << ',' << format_double(ckpt.schedule.lambda[t]) << ','
              << format_double(ckpt.schedule.beta[t]) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep-unfolded POCS for multicast beamforming"};
  app.set_version_flag("--version", std::string("mcast ") + MCAST_VERSION);
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a schedule from a config file");
  train_cmd->add_option("--config", train_args.config, "Flat JSON config")->required();
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_args.log, "Training log CSV (default: <out>.log.csv)");
  train_cmd->add_option("--workers", train_args.workers, "Worker threads")->check(CLI::PositiveNumber);
  train_cmd->add_flag("!--no-timing", train_args.timing, "Write wall_time_ms as 0 for byte-stable logs");
  train_cmd->add_flag("--quiet", train_args.quiet, "No progress on stderr");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Run a checkpoint on held-out channels");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval_cmd->add_option("--realizations", eval_args.realizations)->required()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_args.seed)->required();
  eval_cmd->add_option("--out", eval_args.out)->required();
  eval_cmd->add_option("--iterations", eval_args.iterations, "Horizon; the last parameters are held past T");
  eval_cmd->add_option("--workers", eval_args.workers)->check(CLI::PositiveNumber);

  CompareArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand("compare", "Trained schedule against the baselines");
  cmp_cmd->add_option("--config", cmp_args.config)->required();
  cmp_cmd->add_option("--checkpoint", cmp_args.checkpoint)->required();
  cmp_cmd->add_option("--out", cmp_args.out)->required();
  cmp_cmd->add_option("--realizations", cmp_args.realizations)->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--seed", cmp_args.seed, "Held-out seed (default: config seed)");
  cmp_cmd->add_option("--iterations", cmp_args.iterations, "Horizon for the iterative methods");
  cmp_cmd->add_option("--rand-samples", cmp_args.rand_samples);
  cmp_cmd->add_option("--bound-tol", cmp_args.bound_tol);
  cmp_cmd->add_option("--bound-iter-cap", cmp_args.bound_iter_cap);
  cmp_cmd->add_option("--workers", cmp_args.workers)->check(CLI::PositiveNumber);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep-beta", "Retrain at each softmin weight");
  sweep_cmd->add_option("--config", sweep_args.config)->required();
  sweep_cmd->add_option("--betas", sweep_args.betas, "Comma-separated softmin weights")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_args.out)->required();
  sweep_cmd->add_option("--realizations", sweep_args.realizations)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep_args.seed, "Held-out seed (default: config seed)");
  sweep_cmd->add_option("--workers", sweep_args.workers)->check(CLI::PositiveNumber);

  std::string show_path;
  auto* show_cmd = app.add_subcommand("show", "Print lambda_t and beta_t of a checkpoint");
  show_cmd->add_option("--checkpoint", show_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kUsage, e.what());
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*cmp_cmd) return cmd_compare(cmp_args);
    if (*sweep_cmd) return cmd_sweep(sweep_args);
    return cmd_show(show_path);
  } catch (const CliError& e) {
    return report(e.code(), e.what());
  } catch (const TrainingError& e) {
    return report(kNonFinite, e.what());
  } catch (const std::exception& e) {
    return report(kInternal, e.what());
  }
}
