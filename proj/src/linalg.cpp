#include "qmb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmb/error.hpp"

namespace qmb {

double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& h, double rel_tol) {
  if (h.rows() != h.cols()) return false;
  const double scale = std::max(1.0, max_abs(h));
  return max_abs(h - h.adjoint()) <= rel_tol * scale;
}

ComplexMatrix hermitian_part(const ComplexMatrix& h) {
  return (h + h.adjoint()) * 0.5;
}

namespace {

void require_hermitian(const ComplexMatrix& h, const char* op) {
  if (h.rows() != h.cols()) {
    throw InvalidArgument(std::string(op) + ": matrix is not square");
  }
  if (!is_hermitian(h)) {
    throw InvalidArgument(std::string(op) + ": matrix is not Hermitian (max|H-H^+| = " +
                          std::to_string(max_abs(h - h.adjoint())) + ")");
  }
}

}  // namespace

HermitianEigen herm_eig(const ComplexMatrix& h) {
  require_hermitian(h, "herm_eig");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success) {
    throw NumericalError("herm_eig: eigensolver failed to converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

RealVector sym_eigenvalues(const RealMatrix& a) {
  if (a.size() == 0) return RealVector();
  const RealMatrix sym = (a + a.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("sym_eigenvalues: eigensolver failed to converge");
  }
  return es.eigenvalues();
}

double min_eigenvalue(const RealMatrix& a) {
  const RealVector ev = sym_eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev(0);
}

double min_eigenvalue(const ComplexMatrix& h) {
  if (h.size() == 0) return 0.0;
  return herm_eig(h).values(0);
}

double trace_abs(const ComplexMatrix& a) {
  require_hermitian(a, "trace_abs");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a),
                                                  Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("trace_abs: eigensolver failed to converge");
  }
  return es.eigenvalues().cwiseAbs().sum();
}

ComplexMatrix psd_sqrt(const ComplexMatrix& s) {
  const HermitianEigen eig = herm_eig(s);
  if (eig.values.size() > 0 && eig.values(0) < -kPsdClampTol) {
    throw InvalidArgument("psd_sqrt: matrix has eigenvalue " +
                          std::to_string(eig.values(0)) + " below -1e-10");
  }
  // Eigenvalues at or below the clamp are roundoff on a zero; their square
  // roots (~1e-8) would otherwise dominate the error.
  RealVector root = eig.values;
  for (Eigen::Index i = 0; i < root.size(); ++i) root(i) = root(i) <= kPsdClampTol ? 0.0 : std::sqrt(root(i));
  ComplexMatrix r = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
  return hermitian_part(r);
}

RealSymmetricMatrix realify(const ComplexMatrix& h) {
  require_hermitian(h, "realify");
  const ComplexMatrix hs = hermitian_part(h);
  const Eigen::Index d = hs.rows();
  RealSymmetricMatrix r(2 * d, 2 * d);
  r.topLeftCorner(d, d) = hs.real();
  r.bottomRightCorner(d, d) = hs.real();
  r.bottomLeftCorner(d, d) = hs.imag();
  r.topRightCorner(d, d) = -hs.imag();
  return r;
}

ComplexMatrix derealify(const RealMatrix& r) {
  if (r.rows() != r.cols() || r.rows() % 2 != 0) {
    throw InvalidArgument("derealify: expected a square matrix of even dimension");
  }
  const Eigen::Index d = r.rows() / 2;
  const RealMatrix re = (r.topLeftCorner(d, d) + r.bottomRightCorner(d, d)) * 0.5;
  const RealMatrix im = (r.bottomLeftCorner(d, d) - r.topRightCorner(d, d)) * 0.5;
  ComplexMatrix h(d, d);
  h.real() = re;
  h.imag() = im;
  return h;
}

Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Tr[AB] = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum();
}

}  // namespace qmb
