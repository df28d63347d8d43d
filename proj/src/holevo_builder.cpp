#include <cmath>

#include "builder_util.hpp"
#include "qmb/bounds.hpp"
#include "qmb/error.hpp"

namespace qmb {

HolevoSdp build_holevo_sdp(const StatisticalModel& model, const BoundOptions& options) {
  model.validate();
  const int n = model.num_params();
  const int dim = model.dim;
  const auto ranges = detail::model_sectors(model, options.use_blocks);

  HolevoSdp out;
  HolevoMetadata& meta = out.meta;
  meta.num_params = n;
  meta.dim = dim;

  // Per sector: factor F with F'F = S (rows = kept support or full dim).
  struct Factor {
    int offset;
    int dim;
    ComplexMatrix f;
  };
  std::vector<Factor> factors;
  for (const auto& range : ranges) {
    const int d = range.dim;
    const ComplexMatrix s = model.state.block(range.offset, range.offset, d, d);
    const detail::SupportFrame frame = detail::support_frame(s);
    const int r = frame.rank;
    if (r == 0) {
      for (const auto& dk : model.derivs) {
        if (max_abs(dk.block(range.offset, range.offset, d, d)) > detail::kRankTol) {
          throw InvalidArgument("build_holevo_sdp: a sector with zero state has nonzero derivatives");
        }
      }
      continue;
    }
    bool kernel_clean = true;
    for (const auto& dk : model.derivs) {
      const ComplexMatrix dt =
          frame.u.adjoint() * dk.block(range.offset, range.offset, d, d) * frame.u;
      if (r < d && max_abs(dt.bottomRightCorner(d - r, d - r)) > detail::kRankTol) {
        kernel_clean = false;
      }
    }
    const bool reduce = options.rank_reduction && r < d && kernel_clean;
    std::vector<ComplexMatrix> local;
    if (reduce) {
      const ComplexMatrix p = frame.u.leftCols(r) * frame.u.leftCols(r).adjoint();
      local = gellmann_basis(d, &p).ops;
      RealVector sq = frame.values.head(r).cwiseMax(0.0).cwiseSqrt();
      factors.push_back({range.offset, d, sq.asDiagonal() * frame.u.leftCols(r).adjoint()});
    } else {
      local = detail::full_basis(d);
      factors.push_back({range.offset, d, psd_sqrt(s)});
    }
    for (const auto& b : local) {
      ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
      e.block(range.offset, range.offset, d, d) = b;
      meta.basis.push_back(e);
    }
  }
  if (factors.empty()) throw InvalidArgument("build_holevo_sdp: state is zero");

  const int nb = static_cast<int>(meta.basis.size());
  // Unbiasedness in basis coordinates: T x_j = (theta_j, e_j).
  RealMatrix t(n + 1, nb);
  for (int a = 0; a < nb; ++a) {
    t(0, a) = trace_product(model.state, meta.basis[a]).real();
    for (int k = 0; k < n; ++k) t(k + 1, a) = trace_product(model.derivs[k], meta.basis[a]).real();
  }
  Eigen::JacobiSVD<RealMatrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  meta.x0.resize(n, nb);
  for (int j = 0; j < n; ++j) {
    RealVector rhs = RealVector::Zero(n + 1);
    rhs(0) = model.theta[j];
    rhs(j + 1) = 1.0;
    RealVector coeff = RealVector::Zero(nb);
    const RealVector ur = svd.matrixU().transpose() * rhs;
    for (int i = 0; i < rank; ++i) coeff += (ur(i) / sv(i)) * svd.matrixV().col(i);
    if ((t * coeff - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
      throw InvalidArgument("build_holevo_sdp: no locally unbiased estimator exists for this model");
    }
    meta.x0.row(j) = coeff.transpose();
  }
  meta.nullspace = svd.matrixV().rightCols(nb - rank);
  const int nfree = static_cast<int>(meta.nullspace.cols());

  // Column images F * B for every basis operator, stacked over sectors.
  int kdim = 0;
  for (const auto& f : factors) kdim += static_cast<int>(f.f.rows()) * f.dim;
  std::vector<ComplexVector> image(nb);
  for (int a = 0; a < nb; ++a) {
    image[a].resize(kdim);
    int pos = 0;
    for (const auto& f : factors) {
      const ComplexMatrix fb = f.f * meta.basis[a].block(f.offset, f.offset, f.dim, f.dim);
      for (Eigen::Index c = 0; c < fb.cols(); ++c) {
        image[a].segment(pos, fb.rows()) = fb.col(c);
        pos += static_cast<int>(fb.rows());
      }
    }
  }
  auto combine = [&](const RealVector& coeff) {
    ComplexVector v = ComplexVector::Zero(kdim);
    for (int a = 0; a < nb; ++a) {
      if (coeff(a) != 0.0) v += coeff(a) * image[a];
    }
    return v;
  };

  const int size = n + kdim;
  SparseSymMatrix c;
  {
    detail::RealifiedWriter w(c, 0, size);
    ComplexMatrix m0(kdim, n);
    for (int j = 0; j < n; ++j) m0.col(j) = combine(meta.x0.row(j).transpose());
    w.offdiag_block(m0.adjoint(), 0, n);
    w.diag_block(ComplexMatrix::Identity(kdim, kdim), n);
  }
  std::vector<SdpConstraint> cons;
  // V = sum v_ab E_ab, maximize -trace V.
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      SdpConstraint con;
      detail::RealifiedWriter w(con.a, 0, size);
      w.entry(a, b, Complex(1.0, 0.0));
      con.a.canonicalize();
      con.a.scale(-1.0);
      con.b = a == b ? -1.0 : 0.0;
      cons.push_back(std::move(con));
      ++meta.v_vars;
    }
  }
  std::vector<ComplexVector> dir(nfree);
  for (int q = 0; q < nfree; ++q) dir[q] = combine(meta.nullspace.col(q));
  for (int j = 0; j < n; ++j) {
    for (int q = 0; q < nfree; ++q) {
      SdpConstraint con;
      detail::RealifiedWriter w(con.a, 0, size);
      w.offdiag_block(dir[q].adjoint(), j, n);
      con.a.canonicalize();
      con.a.scale(-1.0);
      cons.push_back(std::move(con));
    }
  }
  out.problem = SdpProblem({2 * size}, std::move(c), std::move(cons), -1.0);
  return out;
}

}  // namespace qmb
