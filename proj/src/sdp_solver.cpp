#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qmb/error.hpp"
#include "qmb/sdp.hpp"

namespace qmb {

namespace {

constexpr double kDivergence = 1e12;
constexpr int kRefineSteps = 2;

double inner(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double fro(const BlockMatrix& a) { return std::sqrt(inner(a, a)); }

void symmetrize(RealMatrix& a) { a = 0.5 * (a + a.transpose()).eval(); }

// Per-constraint index of which blocks it touches: (block, begin, end)
// ranges into the canonical entry list.
struct BlockRange {
  int block;
  std::size_t begin;
  std::size_t end;
};

std::vector<std::vector<BlockRange>> block_ranges(const SdpProblem& p) {
  std::vector<std::vector<BlockRange>> out(p.num_constraints());
  for (int i = 0; i < p.num_constraints(); ++i) {
    const auto& ent = p.constraints()[i].a.entries();
    std::size_t s = 0;
    while (s < ent.size()) {
      std::size_t e = s;
      while (e < ent.size() && ent[e].block == ent[s].block) ++e;
      out[i].push_back({ent[s].block, s, e});
      s = e;
    }
  }
  return out;
}

double range_dot(const std::vector<SparseEntry>& ent, const BlockRange& r, const RealMatrix& t) {
  double s = 0.0;
  for (std::size_t q = r.begin; q < r.end; ++q) {
    const auto& e = ent[q];
    s += e.row == e.col ? e.value * t(e.row, e.row) : e.value * (t(e.row, e.col) + t(e.col, e.row));
  }
  return s;
}

// W A W for the part of A stored in `r`.
RealMatrix congruence(const std::vector<SparseEntry>& ent, const BlockRange& r,
                      const RealMatrix& w) {
  const Eigen::Index k = w.rows();
  const std::size_t nnz = r.end - r.begin;
  if (2 * static_cast<Eigen::Index>(nnz) < k) {
    RealMatrix t = RealMatrix::Zero(k, k);
    for (std::size_t q = r.begin; q < r.end; ++q) {
      const auto& e = ent[q];
      if (e.row == e.col) {
        t.noalias() += e.value * w.col(e.row) * w.col(e.row).transpose();
      } else {
        t.noalias() += e.value * w.col(e.row) * w.col(e.col).transpose();
        t.noalias() += e.value * w.col(e.col) * w.col(e.row).transpose();
      }
    }
    return t;
  }
  RealMatrix aw = RealMatrix::Zero(k, k);
  for (std::size_t q = r.begin; q < r.end; ++q) {
    const auto& e = ent[q];
    aw.row(e.row) += e.value * w.row(e.col);
    if (e.row != e.col) aw.row(e.col) += e.value * w.row(e.row);
  }
  return w * aw;
}

struct Scaling {
  RealMatrix g;     // W = G G'
  RealMatrix ginv;
  RealMatrix w;
  RealVector lambda;
};

bool nt_scaling(const RealMatrix& x, const RealMatrix& z, Scaling& s) {
  Eigen::LLT<RealMatrix> lx(x);
  Eigen::LLT<RealMatrix> lz(z);
  if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
  const RealMatrix Lx = lx.matrixL();
  const RealMatrix Lz = lz.matrixL();
  Eigen::JacobiSVD<RealMatrix> svd(Lz.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.lambda = svd.singularValues();
  if (s.lambda.minCoeff() <= 0.0 || !s.lambda.allFinite()) return false;
  const RealVector rs = s.lambda.cwiseSqrt().cwiseInverse();
  s.g = Lx * svd.matrixV() * rs.asDiagonal();
  const RealMatrix lxinv = lx.matrixL().solve(RealMatrix::Identity(x.rows(), x.cols()));
  s.ginv = s.lambda.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * lxinv;
  s.w = s.g * s.g.transpose();
  symmetrize(s.w);
  return true;
}

// Largest step keeping lambda + alpha * d PSD, where lambda is diagonal.
double max_step(const RealVector& lambda, const RealMatrix& d) {
  const RealVector is = lambda.cwiseSqrt().cwiseInverse();
  RealMatrix m = is.asDiagonal() * d * is.asDiagonal();
  symmetrize(m);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
  const double mn = es.eigenvalues()(0);
  if (mn >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / mn;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options,
                  const StartHint* hint) {
  if (!(options.tol > 0.0)) throw InvalidArgument("solve: tol must be positive");
  if (options.max_iter < 1) throw InvalidArgument("solve: max_iter must be >= 1");

  SdpSolution sol;
  const auto& dims = problem.block_dims();
  const int nb = static_cast<int>(dims.size());
  const int m = problem.num_constraints();
  const double n_total = problem.total_dim();
  const double scale = problem.scale();

  if (problem.inconsistent()) {
    sol.status = SolveStatus::infeasible_suspect;
    sol.message = "dependent constraints with conflicting right-hand sides";
    return sol;
  }

  RealVector b(m);
  for (int i = 0; i < m; ++i) b(i) = problem.constraints()[i].b;
  const BlockMatrix c = problem.objective().to_dense(dims);
  const double norm_b = b.norm();
  const double norm_c = fro(c);
  const auto ranges = block_ranges(problem);

  // Default start: scaled identities sized from the data.
  std::vector<double> xi(nb), zeta(nb);
  {
    std::vector<std::vector<double>> block_norm_a(nb, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) {
      const auto& ent = problem.constraints()[i].a.entries();
      for (const auto& r : ranges[i]) {
        double s = 0.0;
        for (std::size_t q = r.begin; q < r.end; ++q) {
          s += (ent[q].row == ent[q].col ? 1.0 : 2.0) * ent[q].value * ent[q].value;
        }
        block_norm_a[r.block][i] = std::sqrt(s);
      }
    }
    for (int k = 0; k < nb; ++k) {
      const double dk = dims[k];
      double ratio = 0.0;
      double amax = 0.0;
      for (int i = 0; i < m; ++i) {
        if (block_norm_a[k][i] > 0.0) {
          ratio = std::max(ratio, (1.0 + std::abs(b(i))) / (1.0 + block_norm_a[k][i]));
        }
        amax = std::max(amax, block_norm_a[k][i]);
      }
      xi[k] = std::max({10.0, std::sqrt(dk), dk * ratio});
      zeta[k] = std::max({10.0, std::sqrt(dk), amax, c[k].norm()});
    }
  }

  BlockMatrix x(nb), z(nb);
  RealVector y = RealVector::Zero(m);
  for (int k = 0; k < nb; ++k) {
    x[k] = xi[k] * RealMatrix::Identity(dims[k], dims[k]);
    z[k] = zeta[k] * RealMatrix::Identity(dims[k], dims[k]);
  }
  if (hint != nullptr) {
    if (hint->primal.size() == static_cast<std::size_t>(nb)) x = hint->primal;
    if (hint->dual_Z.size() == static_cast<std::size_t>(nb)) z = hint->dual_Z;
    if (hint->dual_y.size() == m) y = hint->dual_y;
  }

  std::vector<Scaling> sc(nb);
  auto finish = [&](SolveStatus st, std::string msg) {
    sol.primal = x;
    sol.dual_Z = z;
    sol.dual_y = y;
    sol.status = st;
    sol.message = std::move(msg);
    return sol;
  };

  for (int iter = 0;; ++iter) {
    // Residuals and progress measures at the current iterate.
    const RealVector ax = problem.apply(x);
    const RealVector rp = b - ax;
    BlockMatrix rd = c;
    {
      const BlockMatrix aty = problem.adjoint(y);
      for (int k = 0; k < nb; ++k) rd[k] -= aty[k] + z[k];
    }
    const double pobj = inner(c, x);
    const double dobj = b.dot(y);
    const double mu = inner(x, z) / n_total;
    sol.primal_obj = scale * pobj;
    sol.dual_obj = scale * dobj;
    sol.gap = std::abs(sol.primal_obj - sol.dual_obj) / (1.0 + std::abs(sol.primal_obj));
    sol.primal_infeas = rp.norm() / (1.0 + norm_b);
    sol.dual_infeas = fro(rd) / (1.0 + norm_c);
    sol.iterations = iter;
    if (sol.primal_infeas <= options.tol && sol.dual_infeas <= options.tol) {
      const double v = (dobj - pobj) * std::abs(scale);
      sol.weak_duality_violation = std::max(sol.weak_duality_violation, v);
    }
    {
      IterationRecord rec;
      rec.iteration = iter;
      rec.primal_obj = sol.primal_obj;
      rec.dual_obj = sol.dual_obj;
      rec.gap = sol.gap;
      rec.primal_infeas = sol.primal_infeas;
      rec.dual_infeas = sol.dual_infeas;
      rec.mu = mu;
      sol.history.push_back(rec);
    }
    if (sol.gap <= options.tol && sol.primal_infeas <= options.tol &&
        sol.dual_infeas <= options.tol) {
      return finish(SolveStatus::optimal, "converged");
    }
    if (iter >= options.max_iter) return finish(SolveStatus::max_iter, "iteration limit reached");
    if (fro(x) > kDivergence || y.norm() > kDivergence) {
      return finish(SolveStatus::infeasible_suspect, "iterates diverged");
    }

    for (int k = 0; k < nb; ++k) {
      if (!nt_scaling(x[k], z[k], sc[k])) {
        return finish(SolveStatus::numerical_failure,
                      "lost positive definiteness in block " + std::to_string(k + 1));
      }
    }

    // Schur complement M_ij = <A_i, W A_j W>.
    RealMatrix schur = RealMatrix::Zero(m, m);
    {
      std::vector<RealMatrix> t(nb);
      std::vector<char> have(nb, 0);
      for (int j = 0; j < m; ++j) {
        const auto& ej = problem.constraints()[j].a.entries();
        for (const auto& r : ranges[j]) {
          t[r.block] = congruence(ej, r, sc[r.block].w);
          have[r.block] = 1;
        }
        for (int i = j; i < m; ++i) {
          const auto& ei = problem.constraints()[i].a.entries();
          double s = 0.0;
          for (const auto& r : ranges[i]) {
            if (have[r.block]) s += range_dot(ei, r, t[r.block]);
          }
          schur(i, j) = s;
          schur(j, i) = s;
        }
        for (const auto& r : ranges[j]) have[r.block] = 0;
      }
    }
    Eigen::LLT<RealMatrix> llt(schur);
    Eigen::LDLT<RealMatrix> ldlt;
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt) {
      ldlt.compute(schur);
      if (ldlt.info() != Eigen::Success) {
        return finish(SolveStatus::numerical_failure, "Schur complement factorization failed");
      }
    }
    auto factor_solve = [&](const RealVector& rhs) -> RealVector {
      return use_llt ? RealVector(llt.solve(rhs)) : RealVector(ldlt.solve(rhs));
    };
    // The assembled M loses accuracy as the iterates approach the boundary,
    // and the primal residual inherits every bit of that error. Refine
    // against the operator form A(W A*(dy) W).
    auto schur_apply = [&](const RealVector& v) -> RealVector {
      BlockMatrix t = problem.adjoint(v);
      for (int k = 0; k < nb; ++k) t[k] = sc[k].w * t[k] * sc[k].w;
      return problem.apply(t);
    };
    auto schur_solve = [&](const RealVector& rhs) -> RealVector {
      RealVector v = factor_solve(rhs);
      double res = (rhs - schur_apply(v)).norm();
      for (int pass = 0; pass < kRefineSteps && res > 0.0; ++pass) {
        const RealVector cand = v + factor_solve(rhs - schur_apply(v));
        const double cand_res = (rhs - schur_apply(cand)).norm();
        if (!(cand_res < res)) break;
        v = cand;
        res = cand_res;
      }
      return v;
    };

    // One Newton solve for a given scaled complementarity right-hand side.
    struct Direction {
      BlockMatrix dx, dz;
      RealVector dy;
    };
    auto direction = [&](const std::vector<RealMatrix>& rhs_c) -> Direction {
      Direction d;
      d.dx.resize(nb);
      d.dz.resize(nb);
      BlockMatrix ghg(nb), dmat(nb);
      for (int k = 0; k < nb; ++k) {
        const RealVector& lam = sc[k].lambda;
        RealMatrix h(dims[k], dims[k]);
        for (int i = 0; i < dims[k]; ++i)
          for (int j = 0; j < dims[k]; ++j) h(i, j) = 2.0 * rhs_c[k](i, j) / (lam(i) + lam(j));
        ghg[k] = sc[k].g * h * sc[k].g.transpose();
        dmat[k] = ghg[k] - sc[k].w * rd[k] * sc[k].w;
      }
      d.dy = schur_solve(rp - problem.apply(dmat));
      const BlockMatrix atdy = problem.adjoint(d.dy);
      for (int k = 0; k < nb; ++k) {
        d.dz[k] = rd[k] - atdy[k];
        symmetrize(d.dz[k]);
        d.dx[k] = ghg[k] - sc[k].w * d.dz[k] * sc[k].w;
        symmetrize(d.dx[k]);
      }
      return d;
    };
    auto steps = [&](const Direction& d, double& ap, double& ad, BlockMatrix& dxs,
                     BlockMatrix& dzs) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      dxs.resize(nb);
      dzs.resize(nb);
      for (int k = 0; k < nb; ++k) {
        dxs[k] = sc[k].ginv * d.dx[k] * sc[k].ginv.transpose();
        dzs[k] = sc[k].g.transpose() * d.dz[k] * sc[k].g;
        ap = std::min(ap, max_step(sc[k].lambda, dxs[k]));
        ad = std::min(ad, max_step(sc[k].lambda, dzs[k]));
      }
    };

    // Predictor.
    std::vector<RealMatrix> rhs(nb);
    for (int k = 0; k < nb; ++k) {
      rhs[k] = RealMatrix::Zero(dims[k], dims[k]);
      rhs[k].diagonal() = -sc[k].lambda.cwiseAbs2();
    }
    const Direction pred = direction(rhs);
    double ap_max = 0.0, ad_max = 0.0;
    BlockMatrix dxs, dzs;
    steps(pred, ap_max, ad_max, dxs, dzs);
    const double ap_a = std::min(1.0, ap_max);
    const double ad_a = std::min(1.0, ad_max);
    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k) {
      mu_aff += (x[k] + ap_a * pred.dx[k]).cwiseProduct(z[k] + ad_a * pred.dz[k]).sum();
    }
    mu_aff /= n_total;
    const double expon = std::max(1.0, 3.0 * std::min(ap_a, ad_a) * std::min(ap_a, ad_a));
    const double sigma = std::min(1.0, std::pow(std::max(mu_aff, 0.0) / mu, expon));

    // Corrector.
    for (int k = 0; k < nb; ++k) {
      RealMatrix corr = dxs[k] * dzs[k];
      corr = 0.5 * (corr + corr.transpose()).eval();
      rhs[k] = -corr;
      rhs[k].diagonal().array() += sigma * mu - sc[k].lambda.cwiseAbs2().array();
    }
    const Direction dir = direction(rhs);
    steps(dir, ap_max, ad_max, dxs, dzs);
    const double gamma = options.step_fraction;
    const double ap = std::min(1.0, gamma * ap_max);
    const double ad = std::min(1.0, gamma * ad_max);
    if (!std::isfinite(ap) || !std::isfinite(ad) || !dir.dy.allFinite()) {
      return finish(SolveStatus::numerical_failure, "non-finite Newton direction");
    }
    for (int k = 0; k < nb; ++k) {
      x[k] += ap * dir.dx[k];
      z[k] += ad * dir.dz[k];
      symmetrize(x[k]);
      symmetrize(z[k]);
    }
    y += ad * dir.dy;
    sol.history.back().step_primal = ap;
    sol.history.back().step_dual = ad;
  }
}

std::string CertificateReport::summary() const {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << "gap=" << gap << (gap_ok ? "" : "(FAIL)") << " pres=" << primal_residual
     << (primal_ok ? "" : "(FAIL)") << " dres=" << dual_residual << (dual_ok ? "" : "(FAIL)")
     << " mineig(X)=" << min_eig_primal << (primal_psd_ok ? "" : "(FAIL)")
     << " mineig(Z)=" << min_eig_dual << (dual_psd_ok ? "" : "(FAIL)");
  return os.str();
}

CertificateReport check_certificate(const SdpProblem& problem, const SdpSolution& solution,
                                    double tol) {
  CertificateReport rep;
  const auto& dims = problem.block_dims();
  const int m = problem.num_constraints();
  if (solution.primal.size() != dims.size() || solution.dual_Z.size() != dims.size() ||
      solution.dual_y.size() != m) {
    rep.gap = rep.primal_residual = rep.dual_residual = std::numeric_limits<double>::infinity();
    rep.min_eig_primal = rep.min_eig_dual = -std::numeric_limits<double>::infinity();
    return rep;
  }
  RealVector b(m);
  for (int i = 0; i < m; ++i) b(i) = problem.constraints()[i].b;
  const BlockMatrix c = problem.objective().to_dense(dims);
  const double p = problem.scale() * inner(c, solution.primal);
  const double d = problem.scale() * b.dot(solution.dual_y);
  rep.gap = std::abs(p - d) / (1.0 + std::abs(p));
  rep.primal_residual = (problem.apply(solution.primal) - b).norm() / (1.0 + b.norm());
  BlockMatrix rd = c;
  const BlockMatrix aty = problem.adjoint(solution.dual_y);
  for (std::size_t k = 0; k < dims.size(); ++k) rd[k] -= aty[k] + solution.dual_Z[k];
  rep.dual_residual = fro(rd) / (1.0 + fro(c));
  rep.min_eig_primal = std::numeric_limits<double>::infinity();
  rep.min_eig_dual = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dims.size(); ++k) {
    rep.min_eig_primal = std::min(rep.min_eig_primal, min_eigenvalue(solution.primal[k]));
    rep.min_eig_dual = std::min(rep.min_eig_dual, min_eigenvalue(solution.dual_Z[k]));
  }
  rep.complementarity = inner(solution.primal, solution.dual_Z) / (1.0 + std::abs(p));
  rep.gap_ok = rep.gap <= tol;
  rep.primal_ok = rep.primal_residual <= tol;
  rep.dual_ok = rep.dual_residual <= tol;
  rep.primal_psd_ok = rep.min_eig_primal >= -tol;
  rep.dual_psd_ok = rep.min_eig_dual >= -tol;
  return rep;
}

}  // namespace qmb
