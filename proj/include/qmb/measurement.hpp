#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmb/linalg.hpp"
#include "qmb/model.hpp"

namespace qmb {

inline constexpr double kPovmPsdTol = 1e-10;
inline constexpr double kPovmCompletenessTol = 1e-9;

struct Povm {
  std::vector<ComplexMatrix> outcomes;

  int size() const { return static_cast<int>(outcomes.size()); }
  int dim() const { return outcomes.empty() ? 0 : static_cast<int>(outcomes.front().rows()); }
};

/// POVM plus classical coefficients xi(j, m) = estimate_j(m) - theta_j.
struct Estimator {
  Povm povm;
  RealMatrix xi;  // n x M
  std::vector<std::string> labels;

  int num_params() const { return static_cast<int>(xi.rows()); }
};

struct PovmReport {
  std::vector<double> min_eigenvalues;
  double completeness_residual = 0.0;  // max |sum Pi - I|
  bool hermitian = true;
  bool ok = false;
  /// Empty when ok, otherwise names the first failing check.
  std::string failure;
};

PovmReport validate_povm(const Povm& povm);

/// p_m = Re trace(S Pi_m). Probabilities below -kPovmPsdTol throw
/// NumericalError; smaller negative values are clamped to zero.
std::vector<double> outcome_probabilities(const ComplexMatrix& state, const Povm& povm);

/// V_jk = sum_m xi_jm xi_km trace(S Pi_m). Throws InvalidArgument on
/// dimension mismatch or an invalid POVM.
RealMatrix mse_matrix(const StatisticalModel& model, const Estimator& estimator);

/// Local unbiasedness in the xi form:
///   sum_m trace(S Pi_m) xi_jm = 0,  sum_m trace(dS_k Pi_m) xi_jm = delta_jk.
struct UnbiasedReport {
  RealVector mean_residual;        // n
  RealMatrix derivative_residual;  // n x n, (j, k)
  double max_residual = 0.0;
};

UnbiasedReport check_unbiased(const StatisticalModel& model, const Estimator& estimator);

/// X_j = sum_m xi_jm Pi_m.
std::vector<ComplexMatrix> estimator_to_x(const Estimator& estimator);

/// Five-outcome measurement for (theta_x, theta_y) on the two-qubit
/// phase-damping probe. With split, Pi_5 is divided into three outcomes
/// using delta = (a^2 + b^2)/2 and a third row of xi for theta_z is added.
Estimator appendix_c_povm(double epsilon, double a, double b, bool split = false);

/// Split form with a = b = sqrt(delta).
Estimator appendix_c_split_povm(double epsilon, double delta);

/// Four-outcome measurement for (phi, eta) on the one-photon interferometer,
/// built from the closed-form entries without any validity check.
Estimator appendix_d_four_outcome(double a0, double a1, double eta);

/// Three-outcome projective measurement on the SLD eigenbasis. Unbiased
/// for every eta in (0, 1).
Estimator appendix_d_projective(double a0, double a1, double eta);

struct AppendixDResult {
  Estimator estimator;
  bool boundary = false;  // three-outcome form returned
  double min_eigenvalue = 0.0;
  /// Which of the two printed validity inequalities eta satisfies.
  bool below_half_difference = false;       // eta < (a0^2 - a1^2)/2
  bool below_branch_condition = false;      // eta < (a0^2 - a1^2)/(2 a0^2)
};

/// Checked constructor. Accepts eta when every outcome is PSD within
/// kPovmPsdTol; when Pi_2 vanishes the three-outcome form is returned.
/// Throws InvalidArgument otherwise.
AppendixDResult appendix_d_povm(double a0, double a1, double eta);

struct SampleResult {
  RealMatrix mse;  // empirical second moment of xi
  std::vector<std::int64_t> counts;
  std::int64_t shots = 0;
  std::uint64_t seed = 0;
  bool empty = false;  // shots == 0
  std::string generator = "mt19937_64";
};

/// Draws outcomes by inverse CDF over p_m. Deterministic per seed.
SampleResult sample(const StatisticalModel& model, const Estimator& estimator,
                    std::int64_t shots, std::uint64_t seed);

}  // namespace qmb
