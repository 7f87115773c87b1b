#pragma once

// Iteration engines: relaxed POCS with per-iteration relaxation (DU-POCS when
// the relaxations are trained) and POCS with bounded perturbation toward
// rank one (DU-POCS-BP when lambda_t, beta_t are trained).

#include <optional>
#include <span>
#include <vector>

#include "mcast/eigen.hpp"
#include "mcast/hermitian.hpp"
#include "mcast/projections.hpp"

namespace mcast {

/// Per-iteration parameters. beta_t enters the update as beta_t^2.
struct UnfoldedSchedule {
  std::vector<double> lambda;
  std::vector<double> beta;

  std::size_t depth() const { return lambda.size(); }
  /// Throws std::invalid_argument unless both lists have equal length >= 1
  /// and finite entries.
  void validate() const;

  static UnfoldedSchedule constant(std::size_t depth, double lambda, double beta);
  UnfoldedSchedule prefix(std::size_t d) const;

  friend bool operator==(const UnfoldedSchedule&, const UnfoldedSchedule&) = default;
};

struct IterateRecord {
  int iteration = 0;  // 1-based: state after `iteration` updates
  double feasibility_loss = 0.0;
  double min_snr = 0.0;  // NaN when not tracked
  double min_snr_db = 0.0;
};

struct IterateTrace {
  std::vector<IterateRecord> records;
  /// X_1 .. X_t, filled only when snapshots are requested.
  std::vector<HermitianMatrix> snapshots;
};

/// T_{B_P} T_{C_K} ... T_{C_1} with a shared relaxation lambda; the power
/// step is skipped when the spec has no power half-space.
HermitianMatrix pocs_sweep(const HermitianMatrix& x, const FeasibilitySpec& spec, double lambda);
void pocs_sweep_inplace(HermitianMatrix& x, const FeasibilitySpec& spec, double lambda);

struct PocsOptions {
  bool stop_on_feasible = false;
  /// When set, min-SNR of the dominant eigenvector is recorded per iteration.
  const ChannelSet* track_snr = nullptr;
  bool keep_snapshots = false;
};

struct PocsResult {
  HermitianMatrix x;
  IterateTrace trace;
  /// First iteration with zero feasibility loss.
  std::optional<int> feasible_at;
};

PocsResult run_pocs(const HermitianMatrix& x0, const FeasibilitySpec& spec,
                    std::span<const double> lambdas, const PocsOptions& options = {});

enum class PerturbationMode {
  /// X - beta^2 (X - lambda_max u u^H): shrink everything but the dominant
  /// component.
  kResidual,
  /// X - beta^2 lambda_max u u^H: literal pseudo-code reading, kept for
  /// experimentation only.
  kDominantComponent,
};

struct PocsBpOptions {
  PerturbationMode mode = PerturbationMode::kResidual;
  int power_iters = kPowerMethodIters;
  double power_eps = kPowerMethodEps;
  bool keep_snapshots = false;
};

/// Iterate plus the dominant eigenpair of that iterate. The pair doubles as
/// the warm start for the next power-method call.
struct BpState {
  HermitianMatrix x;
  EigenPair pair;
};

BpState bp_initial_state(const HermitianMatrix& x0, const PocsBpOptions& options = {});
/// One perturbation + QoS sweep; refreshes state.pair for the new iterate.
void bp_step(BpState& state, const FeasibilitySpec& qos_spec, double lambda, double beta,
             const PocsBpOptions& options = {});

struct PocsBpResult {
  ComplexVec w;
  HermitianMatrix x;
  IterateTrace trace;
};

PocsBpResult run_pocs_bp(const HermitianMatrix& x0, const ChannelSet& channels,
                         const UnfoldedSchedule& schedule, const PocsBpOptions& options = {});
/// Zero-matrix start.
PocsBpResult run_pocs_bp(const ChannelSet& channels, const UnfoldedSchedule& schedule,
                         const PocsBpOptions& options = {});

/// Phase-normalized unit dominant eigenvector. Throws on the zero matrix.
ComplexVec extract_beamformer(const HermitianMatrix& x);

inline constexpr double kConvergenceTolDb = 0.01;

/// Smallest t (1-based) from which every value stays within tol_db of the
/// last one. Returns 0 for an empty sequence.
int iterations_to_convergence(std::span<const double> values_db, double tol_db = kConvergenceTolDb);

}  // namespace mcast
