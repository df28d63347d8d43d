#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmb/linalg.hpp"

namespace qmb {

/// n-parameter family of density matrices evaluated at the true point.
struct StatisticalModel {
  int dim = 0;
  ComplexMatrix state;
  std::vector<ComplexMatrix> derivs;
  std::vector<double> theta;
  std::vector<std::string> labels;
  /// Contiguous diagonal block sizes shared by the state and every
  /// derivative, or empty when the model has no recorded block structure.
  std::vector<int> blocks;

  int num_params() const { return static_cast<int>(derivs.size()); }

  /// Throws InvalidArgument naming the first violated invariant.
  void validate() const;
};

struct SLDData {
  std::vector<ComplexMatrix> operators;
  RealSymmetricMatrix fisher;
};

/// Two-qubit probe (|01>+|10>)/sqrt2 through a known phase-damping channel,
/// evaluated at theta = 0. `params` is a nonempty subset of "xyz"; the
/// order of the characters fixes the parameter order.
StatisticalModel phase_damping_model(double epsilon, std::string_view params);

/// Amplitudes a_0..a_N of sum_k a_k |k, N-k> produced by a balanced beam
/// splitter acting on |N/2, N/2>. Global phase is fixed so that the first
/// nonzero amplitude is real positive.
std::vector<Complex> holland_burnett_probe(int n_photons);

/// Definite-photon-number probe through a lossy arm (transmissivity eta)
/// with phase phi. Parameters are (phi, eta). The Hilbert space is the
/// direct sum over lost-photon sectors l = N, N-1, ..., 0 (in that order),
/// each spanned by |k-l, N-k>, k = l..N.
StatisticalModel interferometer_model(std::span<const Complex> amplitudes, double eta,
                                      double phi = 0.0);

/// Full-rank random state with n random traceless Hermitian derivatives.
StatisticalModel random_model(std::uint64_t seed, int dim, int num_params);

/// Symmetric logarithmic derivatives and the SLD Fisher matrix. Components
/// with lambda_i + lambda_j <= 1e-10 are set to zero.
SLDData sld(const StatisticalModel& model);

struct SldBound {
  double value = 0.0;
  bool pseudo_inverse = false;  // set when J was singular
};

/// trace(J^{-1}). A singular J throws NumericalError unless accept_singular,
/// in which case the pseudo-inverse is used and the flag is raised.
SldBound sld_bound(const StatisticalModel& model, bool accept_singular = false);

/// Parameter-permuted copy (derivative, theta and label order).
StatisticalModel permute_params(const StatisticalModel& model, std::span<const int> order);

/// Block offsets derived from `blocks` (a single block when none recorded).
std::vector<int> block_sizes_or_whole(const StatisticalModel& model);

}  // namespace qmb
