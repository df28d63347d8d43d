#include <cmath>
#include <limits>

#include "builder_util.hpp"
#include "qmb/bounds.hpp"
#include "qmb/error.hpp"

namespace qmb {

namespace {

using detail::RealifiedWriter;

struct SectorData {
  NhSector info;
  ComplexMatrix s;                  // sector state (frame coordinates for support)
  std::vector<ComplexMatrix> d;     // sector derivatives, same coordinates
  std::vector<ComplexMatrix> fixed; // sector X data (nh_u only), same coordinates
  std::vector<ComplexMatrix> basis; // groups 3 and 4 operators, size l_size or dim
};

// Linear functional Re tr(A X) written as the X-slot block G so that the
// Hermitian constraint value is 2 Re tr(G' X_slot).
ComplexMatrix functional_block(const SectorData& sd, const ComplexMatrix& a) {
  if (sd.info.layout != NhLayout::support) return a;
  const int r = sd.info.rank;
  const int d = sd.info.dim;
  ComplexMatrix g = a.topRows(r);
  g.rightCols(d - r) *= 2.0;
  return g;
}

NhLayout choose_layout(const BoundOptions& opt, int rank, int dim, bool kernel_clean,
                       const char* who) {
  NhLayout layout = opt.layout;
  if (layout == NhLayout::automatic) {
    layout = opt.rank_reduction && rank < dim && kernel_clean ? NhLayout::support : NhLayout::full;
  }
  if (layout != NhLayout::full && rank < dim && !kernel_clean) {
    throw InvalidArgument(std::string(who) +
                          ": derivatives do not vanish on the kernel of the state; "
                          "only the full layout applies");
  }
  return layout;
}

NhSdp build_impl(const ComplexMatrix& state, const std::vector<ComplexMatrix>& derivs,
                 const std::vector<double>& theta, const std::vector<ComplexMatrix>* fixed_x,
                 int n, const std::vector<detail::SectorRange>& ranges,
                 const BoundOptions& opt) {
  const char* who = fixed_x ? "build_nh_u_sdp" : "build_nh_sdp";
  NhSdp out;
  NhMetadata& meta = out.meta;
  meta.num_params = n;
  meta.dim = static_cast<int>(state.rows());

  std::vector<SectorData> secs;
  std::vector<int> block_dims;
  for (const auto& range : ranges) {
    SectorData sd;
    sd.info.offset = range.offset;
    sd.info.dim = range.dim;
    const int d = range.dim;
    const ComplexMatrix s = state.block(range.offset, range.offset, d, d);
    const detail::SupportFrame frame = detail::support_frame(s);
    sd.info.rank = frame.rank;
    sd.info.frame = frame.u;
    std::vector<ComplexMatrix> ds;
    for (const auto& dk : derivs) ds.push_back(dk.block(range.offset, range.offset, d, d));
    std::vector<ComplexMatrix> xs;
    if (fixed_x) {
      for (const auto& xk : *fixed_x) xs.push_back(xk.block(range.offset, range.offset, d, d));
    }
    if (frame.rank == 0) {
      for (const auto& dk : ds) {
        if (max_abs(dk) > detail::kRankTol) {
          throw InvalidArgument(std::string(who) +
                                ": a sector with zero state has nonzero derivatives");
        }
      }
      continue;  // contributes nothing; X is zero there
    }
    const int r = frame.rank;
    bool kernel_clean = true;
    for (const auto& dk : ds) {
      const ComplexMatrix dt = frame.u.adjoint() * dk * frame.u;
      if (r < d && max_abs(dt.bottomRightCorner(d - r, d - r)) > detail::kRankTol) {
        kernel_clean = false;
      }
    }
    sd.info.layout = choose_layout(opt, r, d, kernel_clean, who);
    if (sd.info.layout == NhLayout::support) {
      sd.info.l_size = r;
      sd.s = hermitian_part(frame.u.adjoint() * s * frame.u);
      for (auto& dk : ds) dk = hermitian_part(frame.u.adjoint() * dk * frame.u);
      for (auto& xk : xs) xk = frame.u.adjoint() * xk * frame.u;
      sd.basis = detail::full_basis(r);
    } else {
      sd.info.l_size = d;
      sd.s = s;
      if (sd.info.layout == NhLayout::quotient && r < d && d >= 2) {
        const ComplexMatrix p =
            frame.u.leftCols(r) * frame.u.leftCols(r).adjoint();
        sd.basis = gellmann_basis(d, &p).ops;
      } else {
        sd.basis = detail::full_basis(d);
      }
    }
    sd.d = std::move(ds);
    sd.fixed = std::move(xs);
    sd.info.block = static_cast<int>(block_dims.size());
    block_dims.push_back(2 * (n * sd.info.l_size + d));
    meta.basis_size += static_cast<int>(sd.basis.size());
    secs.push_back(std::move(sd));
  }
  if (secs.empty()) throw InvalidArgument(std::string(who) + ": state is zero");

  auto size_of = [&](const SectorData& sd) { return n * sd.info.l_size + sd.info.dim; };

  SparseSymMatrix objective;
  for (const auto& sd : secs) {
    RealifiedWriter w(objective, sd.info.block, size_of(sd));
    const int m = sd.info.l_size;
    const ComplexMatrix sl = sd.info.layout == NhLayout::support
                                 ? ComplexMatrix(sd.s.topLeftCorner(m, m))
                                 : sd.s;
    for (int j = 0; j < n; ++j) w.diag_block(sl, j * m);
  }

  std::vector<SdpConstraint> cons;
  auto push = [&](SparseSymMatrix a, double complex_rhs) {
    // Realified inner products are twice the Hermitian ones.
    cons.push_back({std::move(a), 2.0 * complex_rhs});
  };

  if (!fixed_x) {
    // Group 1: tr(S X_j) = theta_j.
    for (int j = 0; j < n; ++j) {
      SparseSymMatrix a;
      for (const auto& sd : secs) {
        const int m = sd.info.l_size;
        RealifiedWriter w(a, sd.info.block, size_of(sd));
        w.offdiag_block(functional_block(sd, sd.s), j * m, n * m);
      }
      push(std::move(a), 2.0 * theta[j]);
    }
    meta.group_counts[0] = n;
    // Group 2: tr(dS_k X_j) = delta_jk.
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        SparseSymMatrix a;
        for (const auto& sd : secs) {
          const int m = sd.info.l_size;
          RealifiedWriter w(a, sd.info.block, size_of(sd));
          w.offdiag_block(functional_block(sd, sd.d[k]), j * m, n * m);
        }
        push(std::move(a), j == k ? 2.0 : 0.0);
      }
    }
    meta.group_counts[1] = n * n;
    // Group 3: X_j Hermitian.
    for (const auto& sd : secs) {
      const int m = sd.info.l_size;
      for (int j = 0; j < n; ++j) {
        for (const auto& b : sd.basis) {
          SparseSymMatrix a;
          RealifiedWriter w(a, sd.info.block, size_of(sd));
          ComplexMatrix g = ComplexMatrix::Zero(m, sd.info.dim);
          g.leftCols(b.cols()) = kI * b;
          w.offdiag_block(g, j * m, n * m);
          push(std::move(a), 0.0);
          ++meta.group_counts[2];
        }
      }
    }
  } else {
    // X pinned to the data, entry by entry (real and imaginary parts).
    for (const auto& sd : secs) {
      const int m = sd.info.l_size;
      for (int j = 0; j < n; ++j) {
        const ComplexMatrix target = sd.fixed[j].topRows(m);
        for (int p = 0; p < m; ++p) {
          for (int q = 0; q < sd.info.dim; ++q) {
            SparseSymMatrix re;
            RealifiedWriter wr(re, sd.info.block, size_of(sd));
            wr.entry(j * m + p, n * m + q, Complex(0.5, 0.0));
            push(std::move(re), target(p, q).real());
            SparseSymMatrix im;
            RealifiedWriter wi(im, sd.info.block, size_of(sd));
            wi.entry(j * m + p, n * m + q, Complex(0.0, 0.5));
            push(std::move(im), target(p, q).imag());
            meta.group_counts[2] += 2;
          }
        }
      }
    }
  }

  // Group 4: L_jk Hermitian for j < k.
  for (const auto& sd : secs) {
    const int m = sd.info.l_size;
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        for (const auto& b : sd.basis) {
          SparseSymMatrix a;
          RealifiedWriter w(a, sd.info.block, size_of(sd));
          w.offdiag_block(kI * b, j * m, k * m);
          push(std::move(a), 0.0);
          ++meta.group_counts[3];
        }
      }
    }
  }

  // Group 5: the trailing block equals the identity.
  for (const auto& sd : secs) {
    const int m = sd.info.l_size;
    const int d = sd.info.dim;
    const auto basis = detail::full_basis(d);
    for (std::size_t q = 0; q < basis.size(); ++q) {
      SparseSymMatrix a;
      RealifiedWriter w(a, sd.info.block, size_of(sd));
      w.diag_block(basis[q], n * m);
      push(std::move(a), q == 0 ? std::sqrt(static_cast<double>(d)) : 0.0);
      ++meta.group_counts[4];
    }
  }

  for (auto& sd : secs) meta.sectors.push_back(sd.info);
  out.problem = SdpProblem(std::move(block_dims), std::move(objective), std::move(cons), 0.5);
  return out;
}

}  // namespace

NhSdp build_nh_sdp(const StatisticalModel& model, const BoundOptions& options) {
  model.validate();
  return build_impl(model.state, model.derivs, model.theta, nullptr, model.num_params(),
                    detail::model_sectors(model, options.use_blocks), options);
}

NhSdp build_nh_u_sdp(const ComplexMatrix& state, const std::vector<ComplexMatrix>& x,
                     const BoundOptions& options) {
  const int d = static_cast<int>(state.rows());
  if (state.cols() != d || d < 1) throw InvalidArgument("build_nh_u_sdp: state must be square");
  if (max_abs(state - state.adjoint()) > 1e-10) {
    throw InvalidArgument("build_nh_u_sdp: state is not Hermitian");
  }
  if (std::abs(state.trace().real() - 1.0) > 1e-10) {
    throw InvalidArgument("build_nh_u_sdp: state trace must be 1");
  }
  if (min_eigenvalue(ComplexMatrix(hermitian_part(state))) < -1e-10) {
    throw InvalidArgument("build_nh_u_sdp: state is not positive semidefinite");
  }
  if (x.empty()) throw InvalidArgument("build_nh_u_sdp: at least one observable required");
  for (const auto& xj : x) {
    if (xj.rows() != d || xj.cols() != d) {
      throw InvalidArgument("build_nh_u_sdp: observable dimension mismatch");
    }
    if (max_abs(xj - xj.adjoint()) > 1e-10 * std::max(1.0, max_abs(xj))) {
      throw InvalidArgument("build_nh_u_sdp: observable is not Hermitian");
    }
  }
  std::vector<ComplexMatrix> xs;
  for (const auto& xj : x) xs.push_back(hermitian_part(xj));
  return build_impl(hermitian_part(state), {}, {}, &xs, static_cast<int>(x.size()),
                    {{0, d}}, options);
}

NhRecovery recover_nh(const NhMetadata& meta, const BlockMatrix& y) {
  const int n = meta.num_params;
  const int dim = meta.dim;
  NhRecovery rec;
  rec.x.assign(n, ComplexMatrix::Zero(dim, dim));
  rec.l.assign(n, std::vector<ComplexMatrix>(n, ComplexMatrix::Zero(dim, dim)));
  rec.schur_min_eig = std::numeric_limits<double>::infinity();
  for (const auto& sec : meta.sectors) {
    const ComplexMatrix yc = derealify(y.at(sec.block));
    rec.schur_min_eig = std::min(rec.schur_min_eig, min_eigenvalue(ComplexMatrix(hermitian_part(yc))));
    const int m = sec.l_size;
    const int d = sec.dim;
    const int o = sec.offset;
    if (sec.layout != NhLayout::support) {
      for (int j = 0; j < n; ++j) {
        rec.x[j].block(o, o, d, d) = hermitian_part(ComplexMatrix(yc.block(j * m, n * m, d, d)));
        for (int k = 0; k < n; ++k) rec.l[j][k].block(o, o, d, d) = yc.block(j * m, k * m, m, m);
      }
      continue;
    }
    // Support layout: only the support rows of X and the support block of L
    // were variables. The kernel block of X is set to zero and L is lifted to
    // XX' + (L_s - RR'), which equals L_s on the support and keeps the full
    // Schur complement at least as large as the reduced one.
    const int r = sec.rank;
    std::vector<ComplexMatrix> xt(n, ComplexMatrix::Zero(d, d));
    for (int j = 0; j < n; ++j) {
      xt[j].topRows(r) = yc.block(j * m, n * m, r, d);
      xt[j].bottomLeftCorner(d - r, r) = xt[j].topRightCorner(r, d - r).adjoint();
      xt[j].bottomRightCorner(d - r, d - r).setZero();
      xt[j] = hermitian_part(xt[j]);
      rec.x[j].block(o, o, d, d) = sec.frame * xt[j] * sec.frame.adjoint();
    }
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        ComplexMatrix ljk = xt[j] * xt[k];
        ljk.topLeftCorner(r, r) += yc.block(j * m, k * m, r, r) -
                                   xt[j].topRows(r) * xt[k].topRows(r).adjoint();
        rec.l[j][k].block(o, o, d, d) = sec.frame * ljk * sec.frame.adjoint();
      }
    }
  }
  return rec;
}

}  // namespace qmb
