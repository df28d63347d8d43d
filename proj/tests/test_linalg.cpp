#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qmb/error.hpp"
#include "qmb/linalg.hpp"
#include "qmb/model.hpp"

using namespace qmb;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix random_hermitian(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> g;
  ComplexMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) a(i, k) = Complex(g(gen), g(gen));
  return hermitian_part(a);
}

}  // namespace

TEST_CASE("herm_eig on Pauli z is (-1, 1)") {
  const HermitianEigen e = herm_eig(pauli_z());
  CHECK(e.values(0) == doctest::Approx(-1.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
}

TEST_CASE("herm_eig on identity(3) gives ones and a unitary") {
  const HermitianEigen e = herm_eig(ComplexMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(e.values(i) == doctest::Approx(1.0));
  CHECK(max_abs(e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("herm_eig reconstructs a seeded random 6x6 Hermitian") {
  std::mt19937_64 gen(6);
  const ComplexMatrix h = random_hermitian(gen, 6);
  const HermitianEigen e = herm_eig(h);
  const ComplexMatrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  CHECK(max_abs(back - h) < 1e-10);
  for (int i = 1; i < 6; ++i) CHECK(e.values(i) >= e.values(i - 1));
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
  ComplexMatrix a(2, 2);
  a << 1, 2, 0, 1;
  CHECK_THROWS_AS(herm_eig(a), InvalidArgument);
}

TEST_CASE("is_hermitian uses a relative tolerance") {
  ComplexMatrix a = 1e6 * pauli_x();
  a(0, 1) += 1e-7;  // 1e-13 relative
  CHECK(is_hermitian(a));
  a(0, 1) += 1e-3;
  CHECK_FALSE(is_hermitian(a));
}

TEST_CASE("trace_abs of explicit spectra") {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  CHECK(trace_abs(d) == doctest::Approx(3.0));
  CHECK(trace_abs(pauli_y()) == doctest::Approx(2.0));
}

TEST_CASE("trace_abs of the two-parameter commutator term on the damped probe") {
  // Optimal two-parameter Nagaoka observables at eps = 0.5; the commutator
  // term must make up the difference between 4/(2-eps) and the symmetric part.
  const double eps = 0.5;
  const StatisticalModel m = phase_damping_model(eps, "xy");
  ComplexMatrix x1(4, 4);
  x1 << 0, -kI, -kI, 0, kI, 0, 0, kI, kI, 0, 0, kI, 0, -kI, -kI, 0;
  ComplexMatrix x2(4, 4);
  x2 << 0, -1, -1, 0, -1, 0, 0, 1, -1, 0, 0, 1, 0, 1, 1, 0;
  x1 /= (2.0 - eps);
  x2 /= (2.0 - eps);
  const ComplexMatrix r = psd_sqrt(m.state);
  const double comm = trace_abs(hermitian_part(r * (-kI * (x1 * x2 - x2 * x1)) * r));
  const double sym = trace_product(m.state, x1 * x1).real() + trace_product(m.state, x2 * x2).real();
  CHECK(std::abs(comm - (4.0 / (2.0 - eps) - sym)) < 1e-12);
}

TEST_CASE("trace_abs dominates |trace| with equality for semidefinite matrices") {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix h = random_hermitian(gen, 2 + t % 4);
    const double tr = h.trace().real();
    CHECK(trace_abs(h) >= std::abs(tr) - 1e-12);
    const ComplexMatrix p = h * h;
    CHECK(trace_abs(p) == doctest::Approx(p.trace().real()).epsilon(1e-12));
    CHECK(trace_abs(-p) == doctest::Approx(p.trace().real()).epsilon(1e-12));
  }
}

TEST_CASE("psd_sqrt examples") {
  CHECK(max_abs(psd_sqrt(ComplexMatrix::Identity(3, 3)) - ComplexMatrix::Identity(3, 3)) < 1e-14);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 4.0;
  const ComplexMatrix r = psd_sqrt(d);
  CHECK(r(0, 0).real() == doctest::Approx(2.0));
  CHECK(std::abs(r(1, 1)) < 1e-14);

  const StatisticalModel m = phase_damping_model(0.3, "x");
  const ComplexMatrix root = psd_sqrt(m.state);
  CHECK(max_abs(root * root - m.state) < 1e-9);
}

TEST_CASE("psd_sqrt fixes projectors and rejects negative spectra") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 10; ++t) {
    const HermitianEigen e = herm_eig(random_hermitian(gen, 5));
    const ComplexMatrix u = e.vectors.leftCols(1 + t % 4);
    const ComplexMatrix p = u * u.adjoint();
    CHECK(max_abs(psd_sqrt(p) - p) < 1e-9);
  }
  CHECK_THROWS_AS(psd_sqrt(pauli_z()), InvalidArgument);
  ComplexMatrix tiny = ComplexMatrix::Identity(2, 2);
  tiny(1, 1) = -5e-11;
  CHECK_NOTHROW(psd_sqrt(tiny));
}

TEST_CASE("realify layout") {
  RealMatrix expected(4, 4);
  expected << 0, 0, 0, 1, 0, 0, -1, 0, 0, -1, 0, 0, 1, 0, 0, 0;
  CHECK((realify(pauli_y()) - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK((realify(ComplexMatrix::Identity(2, 2)) - RealMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("realify doubles every eigenvalue") {
  std::mt19937_64 gen(21);
  const ComplexMatrix h = random_hermitian(gen, 5);
  const RealVector lc = herm_eig(h).values;
  const RealVector lr = sym_eigenvalues(realify(h));
  for (int i = 0; i < 5; ++i) {
    CHECK(lr(2 * i) == doctest::Approx(lc(i)).epsilon(1e-10));
    CHECK(lr(2 * i + 1) == doctest::Approx(lc(i)).epsilon(1e-10));
  }
}

TEST_CASE("realify preserves the PSD cone on 100 seeded matrices") {
  std::mt19937_64 gen(100);
  for (int t = 0; t < 100; ++t) {
    ComplexMatrix h = random_hermitian(gen, 2 + t % 5);
    if (t % 2 == 0) h = h * h;  // half of them PSD
    const double lc = min_eigenvalue(h);
    const double lr = min_eigenvalue(realify(h));
    CHECK(std::abs(lc - lr) < 1e-10);
  }
}

TEST_CASE("derealify inverts realify") {
  std::mt19937_64 gen(8);
  const ComplexMatrix h = random_hermitian(gen, 4);
  CHECK(max_abs(derealify(realify(h)) - h) < 1e-15);
}

TEST_CASE("trace_product and max_abs") {
  CHECK(trace_product(pauli_x(), pauli_x()).real() == doctest::Approx(2.0));
  CHECK(std::abs(trace_product(pauli_x(), pauli_y())) < 1e-15);
  CHECK(max_abs(pauli_y()) == doctest::Approx(1.0));
}
