#include <algorithm>
#include <cmath>
#include <tuple>

#include "qmb/error.hpp"
#include "qmb/sdp.hpp"

namespace qmb {

namespace {

constexpr double kDependentTol = 1e-10;
constexpr double kConsistencyTol = 1e-8;

}  // namespace

void SparseSymMatrix::add(int block, int row, int col, double value) {
  if (row > col) std::swap(row, col);
  entries_.push_back({block, row, col, value});
}

void SparseSymMatrix::canonicalize() {
  std::sort(entries_.begin(), entries_.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return std::tie(a.block, a.row, a.col) < std::tie(b.block, b.row, b.col);
  });
  std::vector<SparseEntry> merged;
  merged.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (!merged.empty() && merged.back().block == e.block && merged.back().row == e.row &&
        merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const SparseEntry& e) { return e.value == 0.0; });
  entries_ = std::move(merged);
}

void SparseSymMatrix::scale(double alpha) {
  for (auto& e : entries_) e.value *= alpha;
}

double SparseSymMatrix::dot(const BlockMatrix& x) const {
  double s = 0.0;
  for (const auto& e : entries_) {
    const RealMatrix& xb = x[e.block];
    if (e.row == e.col) {
      s += e.value * xb(e.row, e.row);
    } else {
      s += e.value * (xb(e.row, e.col) + xb(e.col, e.row));
    }
  }
  return s;
}

void SparseSymMatrix::add_to(BlockMatrix& x, double alpha) const {
  for (const auto& e : entries_) {
    RealMatrix& xb = x[e.block];
    xb(e.row, e.col) += alpha * e.value;
    if (e.row != e.col) xb(e.col, e.row) += alpha * e.value;
  }
}

BlockMatrix SparseSymMatrix::to_dense(const std::vector<int>& block_dims) const {
  BlockMatrix x;
  for (int d : block_dims) x.push_back(RealMatrix::Zero(d, d));
  add_to(x, 1.0);
  return x;
}

double SparseSymMatrix::norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
  return std::sqrt(s);
}

bool SparseSymMatrix::operator==(const SparseSymMatrix& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.block != b.block || a.row != b.row || a.col != b.col || a.value != b.value) return false;
  }
  return true;
}

namespace {

void check_conformity(const SparseSymMatrix& m, const std::vector<int>& dims,
                      const std::string& what) {
  for (const auto& e : m.entries()) {
    if (e.block < 0 || e.block >= static_cast<int>(dims.size())) {
      throw InvalidArgument(what + ": block index " + std::to_string(e.block) + " out of range");
    }
    if (e.row < 0 || e.col >= dims[e.block]) {
      throw InvalidArgument(what + ": entry (" + std::to_string(e.row) + "," +
                            std::to_string(e.col) + ") exceeds block dimension " +
                            std::to_string(dims[e.block]));
    }
  }
}

// Modified Gram-Schmidt with one reorthogonalization pass, in svec
// coordinates (off-diagonal entries weighted by sqrt 2, so that the
// Euclidean inner product equals the trace inner product). Tracks the
// right-hand side through the same combinations to detect conflicts.
struct IndependenceFilter {
  std::vector<long> coords;  // sorted global svec coordinates in use
  std::vector<long> offsets; // per-block svec offset
  std::vector<RealVector> basis;
  std::vector<double> basis_rhs;

  IndependenceFilter(const std::vector<int>& dims, const std::vector<SdpConstraint>& cons) {
    long off = 0;
    for (int d : dims) {
      offsets.push_back(off);
      off += static_cast<long>(d) * (d + 1) / 2;
    }
    for (const auto& c : cons) {
      for (const auto& e : c.a.entries()) coords.push_back(coord(e));
    }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  }

  long coord(const SparseEntry& e) const {
    // Column-major packed upper triangle.
    return offsets[e.block] + static_cast<long>(e.col) * (e.col + 1) / 2 + e.row;
  }

  RealVector dense(const SparseSymMatrix& a) const {
    RealVector v = RealVector::Zero(static_cast<Eigen::Index>(coords.size()));
    for (const auto& e : a.entries()) {
      const auto it = std::lower_bound(coords.begin(), coords.end(), coord(e));
      v(it - coords.begin()) = e.value * (e.row == e.col ? 1.0 : std::sqrt(2.0));
    }
    return v;
  }

  // Returns 0 if independent (and adds it), 1 if dependent and consistent,
  // 2 if dependent and inconsistent.
  int offer(const SdpConstraint& c) {
    RealVector r = dense(c.a);
    const double norm0 = r.norm();
    double rb = c.b;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const double t = basis[k].dot(r);
        if (t != 0.0) {
          r -= t * basis[k];
          rb -= t * basis_rhs[k];
        }
      }
    }
    const double nr = r.norm();
    if (nr <= kDependentTol * norm0 || norm0 == 0.0) {
      return std::abs(rb) > kConsistencyTol * (1.0 + std::abs(c.b)) ? 2 : 1;
    }
    basis.push_back(r / nr);
    basis_rhs.push_back(rb / nr);
    return 0;
  }
};

}  // namespace

SdpProblem::SdpProblem(std::vector<int> block_dims, SparseSymMatrix objective,
                       std::vector<SdpConstraint> constraints, double scale)
    : block_dims_(std::move(block_dims)), objective_(std::move(objective)), scale_(scale) {
  if (block_dims_.empty()) throw InvalidArgument("sdp: at least one block required");
  for (int d : block_dims_) {
    if (d < 1) throw InvalidArgument("sdp: block dimensions must be positive");
  }
  if (!std::isfinite(scale_) || scale_ == 0.0) throw InvalidArgument("sdp: scale must be finite and nonzero");
  objective_.canonicalize();
  check_conformity(objective_, block_dims_, "sdp objective");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    constraints[i].a.canonicalize();
    check_conformity(constraints[i].a, block_dims_, "sdp constraint " + std::to_string(i + 1));
    if (!std::isfinite(constraints[i].b)) throw InvalidArgument("sdp: non-finite right-hand side");
  }
  IndependenceFilter filter(block_dims_, constraints);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const int verdict = filter.offer(constraints[i]);
    if (verdict == 0) {
      kept_.push_back(static_cast<int>(i));
      constraints_.push_back(std::move(constraints[i]));
    } else {
      ++dropped_;
      if (verdict == 2) inconsistent_ = true;
    }
  }
}

int SdpProblem::total_dim() const {
  int s = 0;
  for (int d : block_dims_) s += d;
  return s;
}

BlockMatrix SdpProblem::zero_blocks() const {
  BlockMatrix x;
  for (int d : block_dims_) x.push_back(RealMatrix::Zero(d, d));
  return x;
}

RealVector SdpProblem::apply(const BlockMatrix& x) const {
  RealVector v(num_constraints());
  for (int i = 0; i < num_constraints(); ++i) v(i) = constraints_[i].a.dot(x);
  return v;
}

BlockMatrix SdpProblem::adjoint(const RealVector& y) const {
  BlockMatrix x = zero_blocks();
  for (int i = 0; i < num_constraints(); ++i) {
    if (y(i) != 0.0) constraints_[i].a.add_to(x, y(i));
  }
  return x;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible_suspect: return "infeasible_suspect";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

}  // namespace qmb
