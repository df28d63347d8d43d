#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qmb/error.hpp"
#include "qmb/measurement.hpp"

namespace qmb {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

ComplexMatrix outer(const ComplexVector& v) { return v * v.adjoint(); }

void check_estimator_dims(const StatisticalModel& model, const Estimator& est, const char* who) {
  const int m = est.povm.size();
  if (m == 0) throw InvalidArgument(std::string(who) + ": POVM has no outcomes");
  if (est.povm.dim() != model.dim) {
    throw InvalidArgument(std::string(who) + ": POVM dimension " + std::to_string(est.povm.dim()) +
                          " does not match model dimension " + std::to_string(model.dim));
  }
  if (est.xi.rows() != model.num_params() || est.xi.cols() != m) {
    throw InvalidArgument(std::string(who) + ": xi is " + std::to_string(est.xi.rows()) + "x" +
                          std::to_string(est.xi.cols()) + ", expected " +
                          std::to_string(model.num_params()) + "x" + std::to_string(m));
  }
}

void check_amplitudes(double a0, double a1, double eta, const char* who) {
  if (!(a0 > 0.0 && a1 > 0.0)) throw InvalidArgument(std::string(who) + ": a0 and a1 must be positive");
  if (std::abs(a0 * a0 + a1 * a1 - 1.0) > 1e-10) {
    throw InvalidArgument(std::string(who) + ": a0^2 + a1^2 must equal 1");
  }
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument(std::string(who) + ": eta must lie in (0, 1)");
}

}  // namespace

PovmReport validate_povm(const Povm& povm) {
  PovmReport r;
  if (povm.outcomes.empty()) {
    r.failure = "POVM has no outcomes";
    return r;
  }
  const int d = povm.dim();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (int m = 0; m < povm.size(); ++m) {
    const ComplexMatrix& p = povm.outcomes[m];
    if (p.rows() != d || p.cols() != d) {
      r.failure = "outcome " + std::to_string(m + 1) + " is not " + std::to_string(d) + "x" +
                  std::to_string(d);
      r.hermitian = false;
      return r;
    }
    if (!is_hermitian(p, 1e-10)) {
      r.hermitian = false;
      if (r.failure.empty()) r.failure = "outcome " + std::to_string(m + 1) + " is not Hermitian";
    }
    const double lo = min_eigenvalue(ComplexMatrix(hermitian_part(p)));
    r.min_eigenvalues.push_back(lo);
    if (lo < -kPovmPsdTol && r.failure.empty()) {
      r.failure = "outcome " + std::to_string(m + 1) + " has negative eigenvalue " + num(lo);
    }
    sum += p;
  }
  r.completeness_residual = max_abs(sum - ComplexMatrix::Identity(d, d));
  if (r.completeness_residual > kPovmCompletenessTol && r.failure.empty()) {
    r.failure = "outcomes do not sum to the identity (residual " + num(r.completeness_residual) + ")";
  }
  r.ok = r.failure.empty();
  return r;
}

std::vector<double> outcome_probabilities(const ComplexMatrix& state, const Povm& povm) {
  std::vector<double> p;
  p.reserve(povm.outcomes.size());
  for (int m = 0; m < povm.size(); ++m) {
    double v = trace_product(state, povm.outcomes[m]).real();
    if (v < -kPovmPsdTol) {
      throw NumericalError("outcome " + std::to_string(m + 1) + " has negative probability " + num(v));
    }
    p.push_back(std::max(v, 0.0));
  }
  return p;
}

RealMatrix mse_matrix(const StatisticalModel& model, const Estimator& estimator) {
  check_estimator_dims(model, estimator, "mse_matrix");
  const PovmReport rep = validate_povm(estimator.povm);
  if (!rep.ok) throw InvalidArgument("mse_matrix: invalid POVM: " + rep.failure);
  const std::vector<double> p = outcome_probabilities(model.state, estimator.povm);
  const RealVector pv = Eigen::Map<const RealVector>(p.data(), static_cast<Eigen::Index>(p.size()));
  RealMatrix v = estimator.xi * pv.asDiagonal() * estimator.xi.transpose();
  return 0.5 * (v + v.transpose());
}

UnbiasedReport check_unbiased(const StatisticalModel& model, const Estimator& estimator) {
  check_estimator_dims(model, estimator, "check_unbiased");
  const int n = model.num_params();
  const int m = estimator.povm.size();
  UnbiasedReport r;
  r.mean_residual = RealVector::Zero(n);
  r.derivative_residual = RealMatrix::Zero(n, n);
  for (int o = 0; o < m; ++o) {
    const ComplexMatrix& pi = estimator.povm.outcomes[o];
    const double p = trace_product(model.state, pi).real();
    for (int j = 0; j < n; ++j) r.mean_residual(j) += p * estimator.xi(j, o);
    for (int k = 0; k < n; ++k) {
      const double dp = trace_product(model.derivs[k], pi).real();
      for (int j = 0; j < n; ++j) r.derivative_residual(j, k) += dp * estimator.xi(j, o);
    }
  }
  r.derivative_residual -= RealMatrix::Identity(n, n);
  r.max_residual = std::max(r.mean_residual.cwiseAbs().maxCoeff(),
                            r.derivative_residual.cwiseAbs().maxCoeff());
  return r;
}

std::vector<ComplexMatrix> estimator_to_x(const Estimator& estimator) {
  const int d = estimator.povm.dim();
  std::vector<ComplexMatrix> x;
  for (int j = 0; j < estimator.num_params(); ++j) {
    ComplexMatrix xj = ComplexMatrix::Zero(d, d);
    for (int o = 0; o < estimator.povm.size(); ++o) xj += estimator.xi(j, o) * estimator.povm.outcomes[o];
    x.push_back(hermitian_part(xj));
  }
  return x;
}

Estimator appendix_c_povm(double epsilon, double a, double b, bool split) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("appendix_c_povm: epsilon must lie in [0, 1]");
  if (a == 0.0 || b == 0.0) throw InvalidArgument("appendix_c_povm: a and b must be nonzero");
  if (a * a + b * b > 1.0 + 1e-12) throw InvalidArgument("appendix_c_povm: a^2 + b^2 must not exceed 1");
  const double delta = 0.5 * (a * a + b * b);
  if (split) {
    if (epsilon >= 1.0) throw InvalidArgument("appendix_c_povm: split form needs epsilon < 1");
    if (1.0 - 2.0 * delta <= 0.0) throw InvalidArgument("appendix_c_povm: split form needs a^2 + b^2 < 1");
  }

  Estimator e;
  ComplexVector phi(4);
  for (int s : {1, -1}) {
    phi << 1.0, s * a * kI, s * a * kI, 1.0;
    e.povm.outcomes.push_back(outer(0.5 * phi));
  }
  for (int s : {1, -1}) {
    phi << 1.0, -s * b, -s * b, -1.0;
    e.povm.outcomes.push_back(outer(0.5 * phi));
  }
  if (!split) {
    ComplexMatrix rest = ComplexMatrix::Identity(4, 4);
    for (const auto& p : e.povm.outcomes) rest -= p;
    e.povm.outcomes.push_back(hermitian_part(rest));
  } else {
    ComplexMatrix p5 = ComplexMatrix::Zero(4, 4);
    p5(1, 1) = delta;
    p5(2, 2) = delta;
    p5(1, 2) = -delta;
    p5(2, 1) = -delta;
    e.povm.outcomes.push_back(p5);
    const double w = 0.5 * (1.0 - 2.0 * delta);
    for (int s : {1, -1}) {
      ComplexMatrix p = ComplexMatrix::Zero(4, 4);
      p(1, 1) = w;
      p(2, 2) = w;
      p(1, 2) = -s * w * kI;
      p(2, 1) = s * w * kI;
      e.povm.outcomes.push_back(p);
    }
  }

  const int m = e.povm.size();
  e.xi = RealMatrix::Zero(split ? 3 : 2, m);
  e.xi(0, 0) = 2.0 / ((2.0 - epsilon) * a);
  e.xi(0, 1) = -e.xi(0, 0);
  e.xi(1, 2) = 2.0 / ((2.0 - epsilon) * b);
  e.xi(1, 3) = -e.xi(1, 2);
  e.labels = {"theta_x", "theta_y"};
  if (split) {
    e.xi(2, 5) = 1.0 / ((1.0 - epsilon) * (1.0 - 2.0 * delta));
    e.xi(2, 6) = -e.xi(2, 5);
    e.labels.push_back("theta_z");
  }
  return e;
}

Estimator appendix_c_split_povm(double epsilon, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("appendix_c_split_povm: delta must lie in (0, 1/2)");
  const double a = std::sqrt(delta);
  return appendix_c_povm(epsilon, a, a, true);
}

Estimator appendix_d_four_outcome(double a0, double a1, double eta) {
  check_amplitudes(a0, a1, eta, "appendix_d_four_outcome");
  const double k = (1.0 - eta) * (1.0 + 2.0 * eta) * a0 * a0 - eta * a1 * a1;
  if (!(k > 0.0)) {
    throw InvalidArgument("appendix_d_four_outcome: (1-eta)(1+2eta)a0^2 - eta a1^2 must be positive");
  }
  const double rk = std::sqrt(k);
  Estimator e;
  ComplexMatrix p1 = ComplexMatrix::Zero(3, 3);
  p1(0, 0) = 1.0;
  ComplexMatrix p2 = ComplexMatrix::Zero(3, 3);
  p2(2, 2) = 1.0 - a0 * a0 / k;
  e.povm.outcomes = {p1, p2};
  for (int s : {1, -1}) {
    ComplexMatrix p = ComplexMatrix::Zero(3, 3);
    p(1, 1) = 0.5;
    p(1, 2) = -0.5 * s * kI * a0 / rk;
    p(2, 1) = 0.5 * s * kI * a0 / rk;
    p(2, 2) = 0.5 * a0 * a0 / k;
    e.povm.outcomes.push_back(p);
  }
  e.xi = RealMatrix::Zero(2, 4);
  const double c = rk / (2.0 * std::sqrt(eta) * a0 * a0 * a1);
  e.xi(0, 2) = c;
  e.xi(0, 3) = -c;
  e.xi(1, 0) = -(1.0 + 2.0 * eta) / (2.0 * a1 * a1);
  e.xi(1, 1) = (1.0 - eta) * (1.0 + 2.0 * eta) / (2.0 * eta * a1 * a1);
  e.xi(1, 2) = 1.0 / (2.0 * a0 * a0);
  e.xi(1, 3) = e.xi(1, 2);
  e.labels = {"phi", "eta"};
  return e;
}

Estimator appendix_d_projective(double a0, double a1, double eta) {
  check_amplitudes(a0, a1, eta, "appendix_d_projective");
  Estimator e;
  ComplexMatrix p1 = ComplexMatrix::Zero(3, 3);
  p1(0, 0) = 1.0;
  e.povm.outcomes = {p1};
  for (int s : {1, -1}) {
    ComplexMatrix p = ComplexMatrix::Zero(3, 3);
    p(1, 1) = 0.5;
    p(2, 2) = 0.5;
    p(1, 2) = -0.5 * s * kI;
    p(2, 1) = 0.5 * s * kI;
    e.povm.outcomes.push_back(p);
  }
  e.xi = RealMatrix::Zero(2, 3);
  const double c = 1.0 / (2.0 * std::sqrt(eta) * a0 * a1);
  e.xi(0, 1) = c;
  e.xi(0, 2) = -c;
  e.xi(1, 0) = -(a0 * a0 + a1 * a1 * eta) / (a1 * a1);
  e.xi(1, 1) = 1.0 - eta;
  e.xi(1, 2) = 1.0 - eta;
  e.labels = {"phi", "eta"};
  return e;
}

AppendixDResult appendix_d_povm(double a0, double a1, double eta) {
  AppendixDResult r;
  const double diff = a0 * a0 - a1 * a1;
  r.below_half_difference = eta < 0.5 * diff;
  r.below_branch_condition = eta < diff / (2.0 * a0 * a0);

  Estimator four = appendix_d_four_outcome(a0, a1, eta);
  if (std::abs(four.povm.outcomes[1](2, 2).real()) <= kPovmPsdTol) {
    r.boundary = true;
    r.estimator = appendix_d_projective(a0, a1, eta);
  } else {
    r.estimator = std::move(four);
  }
  const PovmReport rep = validate_povm(r.estimator.povm);
  r.min_eigenvalue = *std::min_element(rep.min_eigenvalues.begin(), rep.min_eigenvalues.end());
  if (!rep.ok) throw InvalidArgument("appendix_d_povm: eta = " + num(eta) + " is outside the valid region: " + rep.failure);
  return r;
}

SampleResult sample(const StatisticalModel& model, const Estimator& estimator, std::int64_t shots,
                    std::uint64_t seed) {
  check_estimator_dims(model, estimator, "sample");
  if (shots < 0) throw InvalidArgument("sample: shots must be nonnegative");
  const PovmReport rep = validate_povm(estimator.povm);
  if (!rep.ok) throw InvalidArgument("sample: invalid POVM: " + rep.failure);
  const int n = estimator.num_params();
  const int m = estimator.povm.size();
  SampleResult r;
  r.shots = shots;
  r.seed = seed;
  r.counts.assign(m, 0);
  r.mse = RealMatrix::Zero(n, n);
  if (shots == 0) {
    r.empty = true;
    return r;
  }
  const std::vector<double> p = outcome_probabilities(model.state, estimator.povm);
  std::vector<double> cdf(m);
  double acc = 0.0;
  for (int o = 0; o < m; ++o) {
    acc += p[o];
    cdf[o] = acc;
  }
  // Uniform doubles from the top 53 bits; the engine output is specified
  // exactly by the standard, so results do not depend on the library.
  std::mt19937_64 gen(seed);
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++r.counts[it - cdf.begin()];
  }
  RealVector freq(m);
  for (int o = 0; o < m; ++o) freq(o) = static_cast<double>(r.counts[o]) / static_cast<double>(shots);
  r.mse = estimator.xi * freq.asDiagonal() * estimator.xi.transpose();
  return r;
}

}  // namespace qmb
