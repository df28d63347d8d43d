#pragma once

// Dense complex-matrix kernel shared by every other module.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qmb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Dense real symmetric matrix. Callers keep it symmetric; kernels
/// symmetrize on entry where roundoff could break that.
using RealSymmetricMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdClampTol = 1e-10;

inline constexpr Complex kI{0.0, 1.0};

/// max|H - H^+| <= rel_tol * max(1, max|H|).
bool is_hermitian(const ComplexMatrix& h, double rel_tol = kHermitianTol);

/// (H + H^+) / 2
ComplexMatrix hermitian_part(const ComplexMatrix& h);

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // unitary, columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. Throws InvalidArgument on
/// non-Hermitian input and NumericalError if the solver does not converge.
HermitianEigen herm_eig(const ComplexMatrix& h);

/// Eigenvalues of a real symmetric matrix, ascending.
RealVector sym_eigenvalues(const RealMatrix& a);
double min_eigenvalue(const RealMatrix& a);
double min_eigenvalue(const ComplexMatrix& h);

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_abs(const ComplexMatrix& a);

/// Hermitian PSD square root. Eigenvalues in [-1e-10, 1e-10] are treated
/// as zero; anything more negative throws InvalidArgument.
ComplexMatrix psd_sqrt(const ComplexMatrix& s);

/// [[Re H, -Im H], [Im H, Re H]]. Preserves the PSD cone and doubles every
/// eigenvalue's multiplicity.
RealSymmetricMatrix realify(const ComplexMatrix& h);

/// Inverse of realify. Input need not have the exact block structure; the
/// structured part is extracted by averaging the two copies.
ComplexMatrix derealify(const RealMatrix& r);

/// Trace inner product Tr[A B].
Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Largest |entry|.
double max_abs(const ComplexMatrix& a);

}  // namespace qmb
