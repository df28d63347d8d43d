#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmb/linalg.hpp"

namespace qmb {

/// Block-diagonal dense symmetric matrix, one entry per block.
using BlockMatrix = std::vector<RealMatrix>;

/// One stored entry of a block-sparse symmetric matrix; row <= col.
/// An off-diagonal entry stands for both (row, col) and (col, row).
struct SparseEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

class SparseSymMatrix {
 public:
  /// Accumulates `value` at (row, col) and its mirror. Indices are swapped
  /// into the upper triangle.
  void add(int block, int row, int col, double value);

  /// Sorts entries, merges duplicates, drops exact zeros.
  void canonicalize();

  const std::vector<SparseEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// <this, x> = trace(this * x).
  double dot(const BlockMatrix& x) const;
  /// Multiplies every entry by alpha.
  void scale(double alpha);
  /// x += alpha * this.
  void add_to(BlockMatrix& x, double alpha) const;
  BlockMatrix to_dense(const std::vector<int>& block_dims) const;
  /// Frobenius norm of the full symmetric matrix.
  double norm() const;

  bool operator==(const SparseSymMatrix& other) const;

 private:
  std::vector<SparseEntry> entries_;
};

struct SdpConstraint {
  SparseSymMatrix a;
  double b = 0.0;
};

/// minimize <C, X> s.t. <A_i, X> = b_i, X block-diagonal PSD.
/// Dual: maximize b'y s.t. C - sum y_i A_i = Z PSD.
/// Reported objectives are multiplied by `scale`.
class SdpProblem {
 public:
  SdpProblem() = default;
  /// Validates conformity with block_dims (InvalidArgument otherwise) and
  /// drops constraints that are linearly dependent on earlier ones.
  SdpProblem(std::vector<int> block_dims, SparseSymMatrix objective,
             std::vector<SdpConstraint> constraints, double scale = 1.0);

  const std::vector<int>& block_dims() const { return block_dims_; }
  const SparseSymMatrix& objective() const { return objective_; }
  const std::vector<SdpConstraint>& constraints() const { return constraints_; }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  double scale() const { return scale_; }

  /// Number of input constraints removed as dependent.
  int dropped() const { return dropped_; }
  /// Input index of every kept constraint.
  const std::vector<int>& kept() const { return kept_; }
  /// Set when a dependent constraint disagreed with the others on b.
  bool inconsistent() const { return inconsistent_; }

  int total_dim() const;
  BlockMatrix zero_blocks() const;
  /// A(X) as a vector of constraint values.
  RealVector apply(const BlockMatrix& x) const;
  /// sum_i y_i A_i.
  BlockMatrix adjoint(const RealVector& y) const;

 private:
  std::vector<int> block_dims_;
  SparseSymMatrix objective_;
  std::vector<SdpConstraint> constraints_;
  double scale_ = 1.0;
  int dropped_ = 0;
  bool inconsistent_ = false;
  std::vector<int> kept_;
};

enum class SolveStatus { optimal, max_iter, infeasible_suspect, numerical_failure };

std::string_view to_string(SolveStatus status);

struct IterationRecord {
  int iteration = 0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  double mu = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
};

struct SdpSolution {
  BlockMatrix primal;   // X (the builders' Y)
  RealVector dual_y;
  BlockMatrix dual_Z;
  double primal_obj = 0.0;  // scaled
  double dual_obj = 0.0;    // scaled
  double gap = 0.0;         // |p - d| / (1 + |p|)
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::numerical_failure;
  std::string message;
  std::vector<IterationRecord> history;
  /// Largest primal_obj - dual_obj violation seen on iterates that were
  /// feasible to within tol (0 when weak duality held throughout).
  double weak_duality_violation = 0.0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.95;
};

/// Optional interior starting point; any part left empty falls back to the
/// default scaled identity.
struct StartHint {
  BlockMatrix primal;
  BlockMatrix dual_Z;
  RealVector dual_y;
};

/// Infeasible-start primal-dual interior-point method with NT scaling and
/// Mehrotra predictor-corrector steps. Deterministic and single-threaded.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {},
                  const StartHint* hint = nullptr);

struct CertificateReport {
  double gap = 0.0;
  double primal_residual = 0.0;  // ||A(X) - b|| / (1 + ||b||)
  double dual_residual = 0.0;    // ||C - A'y - Z|| / (1 + ||C||)
  double min_eig_primal = 0.0;
  double min_eig_dual = 0.0;
  double complementarity = 0.0;  // <X, Z> / (1 + |<C, X>|)
  bool gap_ok = false;
  bool primal_ok = false;
  bool dual_ok = false;
  bool primal_psd_ok = false;
  bool dual_psd_ok = false;

  bool passed() const { return gap_ok && primal_ok && dual_ok && primal_psd_ok && dual_psd_ok; }
  std::string summary() const;
};

/// Recomputes every optimality measure from the raw solution data.
CertificateReport check_certificate(const SdpProblem& problem, const SdpSolution& solution,
                                    double tol = 1e-8);

/// Sparse SDPA text. The scale is carried in a leading "*scale=" comment.
std::string write_sdpa(const SdpProblem& problem);
SdpProblem read_sdpa(std::string_view text);

}  // namespace qmb
