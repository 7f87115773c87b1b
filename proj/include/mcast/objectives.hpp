#pragma once

// Unsupervised training losses and the min-SNR evaluation metric.

#include <span>
#include <vector>

#include "mcast/hermitian.hpp"
#include "mcast/projections.hpp"

namespace mcast {

inline constexpr double kDefaultSoftminBeta = 3.0;

struct SoftminWeight {
  double beta = kDefaultSoftminBeta;
};

/// Sum of constraint gaps: sum_k max(0, gamma - <X, Q_k>) + max(0, tr X - P),
/// where a gap within the kFeasibilityTol slack counts as zero. Zero iff
/// spec.contains(X).
double feasibility_loss(const HermitianMatrix& x, const FeasibilitySpec& spec);

/// sum s_k e^{-beta s_k} / sum e^{-beta s_k}, evaluated with a max shift.
/// Throws std::invalid_argument for an empty list.
double softmin(std::span<const double> s, double beta);

/// |w^H h_k|^2 / (sigma^2 |w|^2) for every user. Throws on zero w.
std::vector<double> user_snrs(const ComplexVec& w, const ChannelSet& channels);
double min_snr(const ComplexVec& w, const ChannelSet& channels);
/// -softmin(user SNRs, beta)
double mmf_loss(const ComplexVec& w, const ChannelSet& channels, SoftminWeight weight = {});

double to_db(double linear);

}  // namespace mcast
