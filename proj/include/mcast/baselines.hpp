#pragma once

// Comparison points for the trained schedules: the hand-tuned POCS-BP
// schedule, Gaussian randomization of a relaxed solution, and an estimate of
// the SDP relaxation bound obtained without an SDP solver.

#include <cstdint>

#include "mcast/hermitian.hpp"
#include "mcast/unfolded.hpp"

namespace mcast {

/// lambda_t = 1.9, beta_t^2 = 0.9 exp(-t / 500) for t = 1..T.
UnfoldedSchedule reference_schedule(std::size_t depth);

/// Projection onto the PSD cone: eigendecomposition with negative
/// eigenvalues clipped to zero.
HermitianMatrix project_psd(const HermitianMatrix& x);

/// Draws n_samples candidates w = V Sigma^{1/2} e from X = V Sigma V^H with e
/// uniform on the unit sphere and returns the one with the largest min-SNR
/// (lowest sample index on ties). Candidates come from a single stream, so a
/// run with more samples extends a run with fewer.
///
/// Throws std::invalid_argument if X is zero or has an eigenvalue below
/// -1e-8 * max(1, lambda_max).
ComplexVec rand_a(const HermitianMatrix& x, const ChannelSet& channels, std::size_t n_samples,
                  std::uint64_t seed);

inline constexpr double kSdpRelaxation = 1.9;

struct SdpBoundEstimate {
  HermitianMatrix x;       // feasible PSD matrix at the smallest certified power
  double bound = 0.0;      // min_k h_k^H X h_k / (tr(X) sigma^2), linear
  double power = 0.0;      // smallest power certified feasible
  double tol = 0.0;        // bisection bracket width at exit
  int iter_cap = 0;        // POCS iterations allowed per trial power
  int trials = 0;          // feasibility trials run
};

/// Result of one feasibility trial at a fixed power bound.
struct PowerTrial {
  bool feasible = false;
  int iterations = 0;
  HermitianMatrix x;
};

/// POCS over the QoS half-spaces, the power half-space tr(X) <= P (both with
/// relaxation 1.9) and the PSD cone, from X = 0, until the feasibility loss
/// of a PSD iterate is exactly zero or iter_cap sweeps have run.
PowerTrial power_feasibility_trial(const ChannelSet& channels, double power, int iter_cap);

/// Bisection on P over power_feasibility_trial. The initial upper bracket is
/// 2 N gamma / min_k |h_k|^2 (the scaled identity there is strictly
/// feasible) and is doubled, at most 30 times, until certified.
/// Throws std::runtime_error if no upper bracket can be certified.
SdpBoundEstimate sdp_bound_estimate(const ChannelSet& channels, double tol, int iter_cap);

}  // namespace mcast
