#include <cmath>

#include "qmb/bounds.hpp"
#include "qmb/error.hpp"

namespace qmb {

namespace {

// Gell-Mann style operators in a fixed frame. `in_support(i)` marks which
// frame vectors span the support; operators living entirely outside it
// are skipped.
template <typename Pred>
std::vector<ComplexMatrix> frame_ops(int d, int r, Pred in_support) {
  std::vector<ComplexMatrix> ops;
  const double s2 = 1.0 / std::sqrt(2.0);
  ComplexMatrix lead = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    if (in_support(i)) lead(i, i) = 1.0 / std::sqrt(static_cast<double>(r));
  }
  ops.push_back(lead);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      if (!in_support(j) && !in_support(k)) continue;
      ComplexMatrix sym = ComplexMatrix::Zero(d, d);
      sym(j, k) = s2;
      sym(k, j) = s2;
      ops.push_back(sym);
      ComplexMatrix asym = ComplexMatrix::Zero(d, d);
      asym(j, k) = Complex(0.0, -s2);
      asym(k, j) = Complex(0.0, s2);
      ops.push_back(asym);
    }
  }
  // Traceless diagonals over the support vectors, in frame order.
  std::vector<int> sup;
  for (int i = 0; i < d; ++i) {
    if (in_support(i)) sup.push_back(i);
  }
  for (std::size_t l = 1; l < sup.size(); ++l) {
    ComplexMatrix diag = ComplexMatrix::Zero(d, d);
    const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (std::size_t i = 0; i < l; ++i) diag(sup[i], sup[i]) = c;
    diag(sup[l], sup[l]) = -c * static_cast<double>(l);
    ops.push_back(diag);
  }
  return ops;
}

}  // namespace

BasisSet gellmann_basis(int d, const ComplexMatrix* support_projector) {
  if (d < 2) throw InvalidArgument("gellmann_basis: d must be >= 2");
  BasisSet out;
  out.dim = d;
  if (support_projector == nullptr) {
    out.ops = frame_ops(d, d, [](int) { return true; });
    return out;
  }
  const ComplexMatrix& p = *support_projector;
  if (p.rows() != d || p.cols() != d) throw InvalidArgument("gellmann_basis: projector has wrong size");
  if (max_abs(p - p.adjoint()) > 1e-10 || max_abs(p * p - p) > 1e-10) {
    throw InvalidArgument("gellmann_basis: support_projector is not an orthogonal projector");
  }
  const HermitianEigen eig = herm_eig(p);
  // Support (eigenvalue 1) first.
  ComplexMatrix frame(d, d);
  int r = 0;
  for (int i = d - 1; i >= 0; --i) {
    if (eig.values(i) > 0.5) frame.col(r++) = eig.vectors.col(i);
  }
  if (r == 0) throw InvalidArgument("gellmann_basis: support_projector is zero");
  int q = r;
  for (int i = 0; i < d; ++i) {
    if (eig.values(i) <= 0.5) frame.col(q++) = eig.vectors.col(i);
  }
  auto ops = frame_ops(d, r, [r](int i) { return i < r; });
  for (auto& op : ops) op = hermitian_part(frame * op * frame.adjoint());
  out.ops = std::move(ops);
  out.reduced = r < d;
  return out;
}

}  // namespace qmb
