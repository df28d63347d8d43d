#pragma once

#include <vector>

#include "qmb/linalg.hpp"
#include "qmb/model.hpp"
#include "qmb/sdp.hpp"

namespace qmb::detail {

constexpr double kRankTol = 1e-10;

/// Writes a complex Hermitian matrix of size k into block `block` of a
/// real SDP matrix through the [[Re, -Im],[Im, Re]] embedding.
class RealifiedWriter {
 public:
  RealifiedWriter(SparseSymMatrix& out, int block, int k) : out_(out), block_(block), k_(k) {}

  /// Upper entry (p <= q); the (q, p) entry is its conjugate.
  void entry(int p, int q, Complex c);
  /// Hermitian h on the diagonal at offset o (upper triangle read).
  void diag_block(const ComplexMatrix& h, int o);
  /// g at rows ro.., cols co.. strictly above the diagonal.
  void offdiag_block(const ComplexMatrix& g, int ro, int co);

 private:
  SparseSymMatrix& out_;
  int block_;
  int k_;
};

struct SectorRange {
  int offset;
  int dim;
};

std::vector<SectorRange> model_sectors(const StatisticalModel& model, bool use_blocks);

/// Orthonormal Hermitian basis of k x k matrices (also for k = 1),
/// led by I/sqrt(k).
std::vector<ComplexMatrix> full_basis(int k);

/// Eigenvectors of a Hermitian PSD matrix ordered by decreasing eigenvalue,
/// with the eigenvalues and the numerical rank (threshold kRankTol).
struct SupportFrame {
  ComplexMatrix u;
  RealVector values;
  int rank = 0;
};
SupportFrame support_frame(const ComplexMatrix& s);

}  // namespace qmb::detail
