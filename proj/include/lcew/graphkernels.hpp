#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcew/tensor.hpp"
#include "lcew/trajdata.hpp"

namespace lcew {

enum class KernelKind { MI, L2, LONGITUDINAL };

std::string kernel_name(KernelKind kind);
KernelKind kernel_from_name(const std::string& name);

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plug-in histogram mutual information in nats, with the marginal and joint
// entropies the estimate was built from.
struct MIEstimate {
  double value = 0.0;  // clamped at 0
  double h_a = 0.0;
  double h_b = 0.0;
  double h_joint = 0.0;
  int sample_count = 0;
  int bin_count = 0;
};

// Equal-width binning per series over its own [min, max]. Exactly symmetric
// in its arguments: the joint entropy is accumulated in a transpose-invariant
// order. Throws InsufficientSamples for fewer than 5 samples.
MIEstimate histogram_mi(std::span<const double> a, std::span<const double> b, int bins);

struct KernelParams {
  int mi_bins = 8;
  int mi_min_samples = 5;  // shorter prefixes contribute weight 0
};

struct AdjacencyMatrix {
  KernelKind kind = KernelKind::MI;
  int t = 0;
  Mat w;  // N x N, symmetric, zero diagonal
};

struct NormalizedAdjacency {
  int t = 0;
  Mat w;  // symmetric, spectrum in [-1, 1]
};

// Interaction weights at timestep t of the scene history.
//   MI           max over the four attribute pairings of histogram MI on the
//                position prefixes [0..t]
//   L2           inverse Euclidean distance at t
//   LONGITUDINAL inverse longitudinal gap at t
AdjacencyMatrix adjacency(const Scene& scene, int t, KernelKind kind,
                          const KernelParams& params = {});

// A_hat = A + I, Lambda = diag(row sums); returns Lambda^-1/2 A_hat Lambda^-1/2.
NormalizedAdjacency normalize_adjacency(const AdjacencyMatrix& a);

// Normalized adjacency for every history timestep.
std::vector<NormalizedAdjacency> adjacency_stack(const Scene& scene, KernelKind kind,
                                                 const KernelParams& params = {});

}  // namespace lcew
