#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qmb/error.hpp"
#include "qmb/model.hpp"
#include "qmb/sdp.hpp"

namespace qmb {

/// Orthonormal Hermitian operator basis, trace(B_j B_k) = delta_jk.
struct BasisSet {
  int dim = 0;
  std::vector<ComplexMatrix> ops;
  bool reduced = false;
  int kept() const { return static_cast<int>(ops.size()); }
};

/// Generalized Gell-Mann basis with B_1 = I/sqrt(d). Given a rank-r
/// orthogonal projector P, returns instead d^2 - (d-r)^2 operators spanning
/// the complement of the operators supported on ker P, built in the
/// eigenframe of P and led by P/sqrt(r).
BasisSet gellmann_basis(int d, const ComplexMatrix* support_projector = nullptr);

/// How the Nagaoka-Hayashi variable is laid out.
///  full:     Y = [[L, X],[X', W]] of size (n+1)d with the full basis.
///  quotient: same variable, groups 3 and 4 over the quotient basis.
///  support:  L and the rows of X restricted to the support of the state,
///            size n r + d, expressed in the state's eigenframe.
///  automatic picks support when rank reduction is enabled and the state
///  is rank deficient, full otherwise.
enum class NhLayout { automatic, full, quotient, support };

struct BoundOptions {
  double tol = 1e-8;
  int max_iter = 200;
  bool rank_reduction = true;
  bool use_blocks = true;
  NhLayout layout = NhLayout::automatic;
  /// Checks the recovered operators against the result invariants.
  bool verify = true;
};

/// One diagonal sector of the model (the whole space when no block
/// structure is used) and where its variables live in the SDP.
struct NhSector {
  int offset = 0;  // first row of the sector in the model's basis
  int dim = 0;
  int rank = 0;
  NhLayout layout = NhLayout::full;
  int block = 0;     // SDP block index
  int l_size = 0;    // rows per L_jk block (dim, or rank for support)
  ComplexMatrix frame;  // eigenvectors of the sector state, support first
};

struct NhMetadata {
  int num_params = 0;
  int dim = 0;
  std::vector<NhSector> sectors;
  /// Constraint count per group 1..5 before dependency removal.
  std::array<int, 5> group_counts{};
  int basis_size = 0;  // operators used by groups 3 and 4, summed over sectors
};

struct NhSdp {
  SdpProblem problem;
  NhMetadata meta;
};

NhSdp build_nh_sdp(const StatisticalModel& model, const BoundOptions& options = {});

/// Operator-MSE variant: X given, the unbiasedness groups replaced by
/// constraints pinning the X block to the data.
NhSdp build_nh_u_sdp(const ComplexMatrix& state, const std::vector<ComplexMatrix>& x,
                     const BoundOptions& options = {});

/// Complex (L, X) read back from a primal solution. L[j][k] is reported in
/// the model's basis; for the support layout it lives on the support.
struct NhRecovery {
  std::vector<ComplexMatrix> x;
  std::vector<std::vector<ComplexMatrix>> l;
  /// Smallest eigenvalue over sectors of the Hermitian variable [[L, X],[X', W]].
  double schur_min_eig = 0.0;
};

NhRecovery recover_nh(const NhMetadata& meta, const BlockMatrix& y);

struct HolevoMetadata {
  int num_params = 0;
  int dim = 0;
  std::vector<ComplexMatrix> basis;  // block-embedded operators
  RealMatrix x0;                     // num_params x basis coefficients
  RealMatrix nullspace;              // basis x free directions
  int v_vars = 0;
};

struct HolevoSdp {
  SdpProblem problem;
  HolevoMetadata meta;
};

HolevoSdp build_holevo_sdp(const StatisticalModel& model, const BoundOptions& options = {});

enum class BoundKind { nagaoka_hayashi, holevo, nh_u };

std::string_view to_string(BoundKind kind);

struct SolverStats {
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  int constraints = 0;
  int dropped = 0;
  std::vector<int> block_dims;
};

struct BoundResult {
  double value = 0.0;
  BoundKind kind = BoundKind::nagaoka_hayashi;
  std::vector<ComplexMatrix> x;
  std::vector<std::vector<ComplexMatrix>> l;  // empty for holevo
  RealMatrix v;                                // holevo only
  double gap = 0.0;
  SolverStats stats;
  SdpSolution solution;
};

/// Raised when the SDP solve does not reach an optimal status; carries the
/// problem and the last iterate.
class SolverFailure : public NumericalError {
 public:
  SolverFailure(const std::string& what, SdpProblem problem, SdpSolution solution)
      : NumericalError(what), problem_(std::move(problem)), solution_(std::move(solution)) {}
  const SdpProblem& problem() const { return problem_; }
  const SdpSolution& solution() const { return solution_; }

 private:
  SdpProblem problem_;
  SdpSolution solution_;
};

BoundResult nagaoka_hayashi_bound(const StatisticalModel& model, const BoundOptions& options = {});
BoundResult holevo_bound(const StatisticalModel& model, const BoundOptions& options = {});
BoundResult nh_u_bound(const ComplexMatrix& state, const std::vector<ComplexMatrix>& x,
                       const BoundOptions& options = {});

/// Tr[S X1 X1 + S X2 X2] + TrAbs(S[X1, X2]) evaluated as
/// TrAbs(sqrt(S) (-i[X1, X2]) sqrt(S)).
double nagaoka_explicit_two_obs(const ComplexMatrix& state, const ComplexMatrix& x1,
                                const ComplexMatrix& x2);

/// Residuals of trace(S X_j) = theta_j and trace(dS_k X_j) = delta_jk,
/// maximum absolute value.
double unbiasedness_residual(const StatisticalModel& model, const std::vector<ComplexMatrix>& x);

}  // namespace qmb
