#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "qmb/bounds.hpp"
#include "qmb/linalg.hpp"
#include "qmb/measurement.hpp"
#include "qmb/model.hpp"
#include "qmb/povm_json.hpp"

using namespace qmb;

namespace {

StatisticalModel ifo_n1(double a1sq, double eta) {
  const std::vector<Complex> amps = {std::sqrt(1.0 - a1sq), std::sqrt(a1sq)};
  return interferometer_model(amps, eta);
}

double branch1(double a1sq, double eta) {
  return (1.0 + 3.0 * eta - 4.0 * eta * eta * eta) / (4.0 * eta * a1sq);
}

int row_of(const Estimator& e, const std::string& label) {
  const auto it = std::find(e.labels.begin(), e.labels.end(), label);
  REQUIRE(it != e.labels.end());
  return static_cast<int>(it - e.labels.begin());
}

}  // namespace

TEST_CASE("computational-basis projectors form a valid POVM") {
  Povm p;
  p.outcomes = {ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2)};
  p.outcomes[0](0, 0) = 1.0;
  p.outcomes[1](1, 1) = 1.0;
  const PovmReport r = validate_povm(p);
  CHECK(r.ok);
  CHECK(r.completeness_residual == 0.0);
  CHECK(r.min_eigenvalues.size() == 2);

  p.outcomes[1](1, 1) = 0.9;
  CHECK_FALSE(validate_povm(p).ok);
  CHECK(validate_povm(p).failure.find("identity") != std::string::npos);
  p.outcomes[1](1, 1) = 1.0;
  p.outcomes[0](0, 1) = 0.5;
  CHECK_FALSE(validate_povm(p).ok);
  CHECK(validate_povm(p).failure.find("Hermitian") != std::string::npos);
}

TEST_CASE("five-outcome damped-probe measurement") {
  const Estimator e = appendix_c_povm(0.4, 0.5, 0.5);
  CHECK(e.povm.size() == 5);
  CHECK(validate_povm(e.povm).ok);
  const StatisticalModel m = phase_damping_model(0.4, "xy");
  const RealMatrix v = mse_matrix(m, e);
  CHECK(std::abs(v(0, 0) - 1.25) < 1e-12);
  CHECK(std::abs(v(1, 1) - 1.25) < 1e-12);
  CHECK((v - v.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(check_unbiased(m, e).max_residual < 1e-10);
}

TEST_CASE("five-outcome sum does not depend on a or b") {
  for (double eps : {0.0, 0.3, 0.6, 0.9}) {
    const StatisticalModel m = phase_damping_model(eps, "xy");
    for (int i = 1; i <= 7; ++i) {
      for (int k = 1; k <= 7; ++k) {
        const double a = 0.1 * i;
        const double b = 0.1 * k;
        if (a * a + b * b > 1.0) continue;
        const Estimator e = appendix_c_povm(eps, a, b);
        CHECK(std::abs(mse_matrix(m, e).trace() - 4.0 / (2.0 - eps)) < 1e-9);
        CHECK(check_unbiased(m, e).max_residual < 1e-10);
      }
    }
  }
}

TEST_CASE("five-outcome probabilities and observables") {
  const double eps = 0.5;
  const Estimator e = appendix_c_povm(eps, 0.6, 0.6);
  const auto p = outcome_probabilities(phase_damping_model(eps, "xy").state, e.povm);
  CHECK(std::abs(p[0] + p[1] - 0.36 * (2.0 - eps) / 2.0) < 1e-12);

  ComplexMatrix x1(4, 4);
  x1 << 0, -kI, -kI, 0, kI, 0, 0, kI, kI, 0, 0, kI, 0, -kI, -kI, 0;
  ComplexMatrix x2(4, 4);
  x2 << 0, -1, -1, 0, -1, 0, 0, 1, -1, 0, 0, 1, 0, 1, 1, 0;
  for (double a : {0.2, 0.6}) {
    const auto x = estimator_to_x(appendix_c_povm(eps, a, 0.3));
    CHECK(max_abs(x[0] - x1 / (2.0 - eps)) < 1e-10);
    CHECK(max_abs(x[1] - x2 / (2.0 - eps)) < 1e-10);
  }
}

TEST_CASE("five-outcome edge of the parameter range") {
  const double s = std::sqrt(0.5);
  const Estimator e = appendix_c_povm(0.3, s, s);
  const PovmReport r = validate_povm(e.povm);
  CHECK(r.ok);
  CHECK(std::abs(r.min_eigenvalues[4]) < 1e-12);
  CHECK_THROWS_AS(appendix_c_povm(0.3, 0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(appendix_c_povm(0.3, 0.8, 0.8), InvalidArgument);
}

TEST_CASE("split measurement estimates the third parameter") {
  for (double eps : {0.1, 0.4, 0.7}) {
    const StatisticalModel m = phase_damping_model(eps, "xyz");
    for (double delta : {0.05, 0.01, 0.005}) {
      const Estimator e = appendix_c_split_povm(eps, delta);
      CHECK(e.povm.size() == 7);
      CHECK(validate_povm(e.povm).ok);
      CHECK(check_unbiased(m, e).max_residual < 1e-9);
      const RealMatrix v = mse_matrix(m, e);
      CHECK(std::abs(v(2, 2) - 1.0 / ((1.0 - eps) * (1.0 - eps) * (1.0 - 2.0 * delta))) < 1e-9);
      CHECK(std::abs(v(0, 0) + v(1, 1) - 4.0 / (2.0 - eps)) < 1e-9);
    }
  }
  const Estimator direct = appendix_c_povm(0.3, 0.1, 0.1, true);
  const StatisticalModel m = phase_damping_model(0.3, "xyz");
  CHECK(std::abs(mse_matrix(m, direct)(2, 2) - 1.0 / (0.49 * 0.98)) < 1e-9);
}

TEST_CASE("zero coefficients give a zero MSE matrix") {
  Estimator e = appendix_c_povm(0.4, 0.5, 0.5);
  e.xi.setZero();
  CHECK(mse_matrix(phase_damping_model(0.4, "xy"), e).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("doubling the coefficients doubles the derivative condition") {
  Estimator e = appendix_c_povm(0.4, 0.5, 0.5);
  e.xi *= 2.0;
  const UnbiasedReport r = check_unbiased(phase_damping_model(0.4, "xy"), e);
  CHECK(r.derivative_residual(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.derivative_residual(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.derivative_residual(0, 1)) < 1e-12);
  CHECK(r.mean_residual.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-outcome measurement gives a multiple of the identity") {
  Estimator e;
  e.povm.outcomes = {ComplexMatrix::Identity(3, 3)};
  e.xi = RealMatrix::Constant(1, 1, 2.5);
  const auto x = estimator_to_x(e);
  CHECK(max_abs(x[0] - 2.5 * ComplexMatrix::Identity(3, 3)) < 1e-15);
}

TEST_CASE("MSE matrix is invariant under relabelling outcomes") {
  const Estimator e = appendix_c_povm(0.3, 0.4, 0.2, true);
  const StatisticalModel m = phase_damping_model(0.3, "xyz");
  Estimator p = e;
  const std::vector<int> order = {6, 2, 0, 5, 1, 4, 3};
  for (int k = 0; k < 7; ++k) {
    p.povm.outcomes[k] = e.povm.outcomes[order[k]];
    p.xi.col(k) = e.xi.col(order[k]);
  }
  CHECK((mse_matrix(m, e) - mse_matrix(m, p)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dimension mismatches are rejected") {
  const Estimator e = appendix_c_povm(0.4, 0.5, 0.5);
  CHECK_THROWS_AS(mse_matrix(phase_damping_model(0.4, "xyz"), e), InvalidArgument);
  CHECK_THROWS_AS(mse_matrix(ifo_n1(0.3, 0.1), e), InvalidArgument);
  Estimator bad = e;
  bad.xi = RealMatrix::Zero(2, 4);
  CHECK_THROWS_AS(mse_matrix(phase_damping_model(0.4, "xy"), bad), InvalidArgument);
}

TEST_CASE("four-outcome interferometer measurement") {
  const double a1sq = 0.3;
  const double eta = 0.1;
  const double a0 = std::sqrt(1.0 - a1sq);
  const double a1 = std::sqrt(a1sq);
  const AppendixDResult r = appendix_d_povm(a0, a1, eta);
  CHECK_FALSE(r.boundary);
  CHECK(r.estimator.povm.size() == 4);
  CHECK(r.below_branch_condition);
  const PovmReport rep = validate_povm(r.estimator.povm);
  CHECK(rep.ok);
  CHECK(rep.completeness_residual < 1e-10);
  const StatisticalModel m = ifo_n1(a1sq, eta);
  CHECK(check_unbiased(m, r.estimator).max_residual < 1e-10);
  const RealMatrix v = mse_matrix(m, r.estimator);
  const int ie = row_of(r.estimator, "eta");
  const int ip = row_of(r.estimator, "phi");
  const double s = 1.0 + eta - 2.0 * eta * eta;
  CHECK(std::abs(v(ie, ie) - s / (2.0 * a1sq)) < 1e-10);
  CHECK(std::abs(v(ip, ip) - s / (4.0 * eta * a1sq)) < 1e-10);
  CHECK(std::abs(v.trace() - branch1(a1sq, eta)) < 1e-9);
}

TEST_CASE("four-outcome measurement saturates the first branch on its validity grid") {
  int checked = 0;
  for (int i = 1; i <= 9; ++i) {
    const double a1sq = 0.05 * i;  // a1 < 1/sqrt(2)
    const double a0sq = 1.0 - a1sq;
    const double edge = (a0sq - a1sq) / (2.0 * a0sq);
    for (int k = 1; k <= 9; ++k) {
      const double eta = edge * k / 10.0;
      const Estimator four = appendix_d_four_outcome(std::sqrt(a0sq), std::sqrt(a1sq), eta);
      if (!validate_povm(four.povm).ok) continue;
      const StatisticalModel m = ifo_n1(a1sq, eta);
      CHECK(check_unbiased(m, four).max_residual < 1e-9);
      CHECK(std::abs(mse_matrix(m, four).trace() - branch1(a1sq, eta)) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked >= 40);
}

TEST_CASE("four-outcome measurement beyond the validity region names the bad outcome") {
  const double a1sq = 0.3;
  const double a0 = std::sqrt(0.7);
  const double a1 = std::sqrt(a1sq);
  const double eta = 0.45;  // past (a0^2 - a1^2)/(2 a0^2) = 0.2857
  const PovmReport rep = validate_povm(appendix_d_four_outcome(a0, a1, eta).povm);
  CHECK_FALSE(rep.ok);
  CHECK(rep.failure.find("negative eigenvalue") != std::string::npos);
  try {
    appendix_d_povm(a0, a1, eta);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("outcome") != std::string::npos);
  }
}

TEST_CASE("at the boundary the measurement becomes projective") {
  const double a1sq = 0.3;
  const double a0sq = 0.7;
  const double eta = (a0sq - a1sq) / (2.0 * a0sq);
  const AppendixDResult r = appendix_d_povm(std::sqrt(a0sq), std::sqrt(a1sq), eta);
  CHECK(r.boundary);
  CHECK(r.estimator.povm.size() == 3);
  const StatisticalModel m = ifo_n1(a1sq, eta);
  CHECK(check_unbiased(m, r.estimator).max_residual < 1e-9);
  CHECK(std::abs(mse_matrix(m, r.estimator).trace() - branch1(a1sq, eta)) < 1e-8);
  for (const auto& pi : r.estimator.povm.outcomes) CHECK(max_abs(pi * pi - pi) < 1e-10);

  const Estimator four = appendix_d_four_outcome(std::sqrt(a0sq), std::sqrt(a1sq), eta);
  CHECK(four.povm.outcomes[1].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("no unbiased measurement beats the NH bound") {
  for (double eps : {0.1, 0.5, 0.8}) {
    const StatisticalModel m = phase_damping_model(eps, "xy");
    const double nh = nagaoka_hayashi_bound(m).value;
    for (double a : {0.2, 0.5})
      for (double b : {0.3, 0.6}) CHECK(mse_matrix(m, appendix_c_povm(eps, a, b)).trace() >= nh - 1e-6);
    const StatisticalModel m3 = phase_damping_model(eps, "xyz");
    const double nh3 = nagaoka_hayashi_bound(m3).value;
    CHECK(mse_matrix(m3, appendix_c_split_povm(eps, 0.01)).trace() >= nh3 - 1e-6);
  }
  for (double a1sq : {0.2, 0.35})
    for (double eta : {0.05, 0.15, 0.6}) {
      const StatisticalModel m = ifo_n1(a1sq, eta);
      const double nh = nagaoka_hayashi_bound(m).value;
      const Estimator proj = appendix_d_projective(std::sqrt(1.0 - a1sq), std::sqrt(a1sq), eta);
      CHECK(check_unbiased(m, proj).max_residual < 1e-9);
      CHECK(mse_matrix(m, proj).trace() >= nh - 1e-6);
    }
}

TEST_CASE("sampled MSE agrees with the exact matrix") {
  const StatisticalModel m = phase_damping_model(0.4, "xy");
  const Estimator e = appendix_c_povm(0.4, 0.5, 0.5);
  const RealMatrix exact = mse_matrix(m, e);
  const auto p = outcome_probabilities(m.state, e.povm);
  const std::int64_t shots = 1000000;
  const SampleResult s = sample(m, e, shots, 2024);
  CHECK(s.shots == shots);
  CHECK_FALSE(s.empty);
  std::int64_t total = 0;
  for (auto c : s.counts) total += c;
  CHECK(total == shots);
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      double m2 = 0.0;
      for (int o = 0; o < e.povm.size(); ++o) m2 += p[o] * std::pow(e.xi(j, o) * e.xi(k, o), 2);
      const double sigma = std::sqrt((m2 - exact(j, k) * exact(j, k)) / double(shots));
      CHECK(std::abs(s.mse(j, k) - exact(j, k)) <= 5.0 * sigma + 1e-15);
    }
  }
}

TEST_CASE("sampling edge cases") {
  const StatisticalModel m = phase_damping_model(0.4, "xy");
  const Estimator e = appendix_c_povm(0.4, 0.5, 0.5);
  const SampleResult none = sample(m, e, 0, 1);
  CHECK(none.empty);
  CHECK(none.mse.cwiseAbs().maxCoeff() == 0.0);
  const SampleResult a = sample(m, e, 5000, 99);
  const SampleResult b = sample(m, e, 5000, 99);
  CHECK(a.counts == b.counts);
  CHECK((a.mse - b.mse).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.seed == 99);
  CHECK(sample(m, e, 5000, 100).counts != a.counts);
  CHECK_THROWS_AS(sample(m, e, -1, 1), InvalidArgument);
}

TEST_CASE("estimators round-trip through JSON") {
  const Estimator e = appendix_c_povm(0.35, 0.4, 0.3, true);
  const Estimator back = estimator_from_json(estimator_to_json(e));
  REQUIRE(back.povm.size() == e.povm.size());
  for (int k = 0; k < e.povm.size(); ++k) CHECK(max_abs(back.povm.outcomes[k] - e.povm.outcomes[k]) == 0.0);
  CHECK((back.xi - e.xi).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.labels == e.labels);
  const StatisticalModel m = phase_damping_model(0.35, "xyz");
  CHECK(mse_matrix(m, back).trace() == mse_matrix(m, e).trace());

  CHECK_THROWS_AS(estimator_from_json("{\"dim\": 2,"), ParseError);
  CHECK_THROWS_AS(estimator_from_json("{\"dim\": 2}"), InvalidArgument);
  // A lone projector is not complete.
  const std::string incomplete =
      "{\"dim\": 2, \"outcomes\": [[[[1,0],[0,0]],[[0,0],[0,0]]]], \"xi\": [[1]]}";
  try {
    estimator_from_json(incomplete);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("outcomes") != std::string::npos);
  }
}
