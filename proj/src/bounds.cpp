#include <cmath>
#include <sstream>

#include "qmb/bounds.hpp"
#include "qmb/error.hpp"

namespace qmb {

namespace {

constexpr double kUnbiasedTol = 1e-6;
constexpr double kSchurTol = 1e-7;

SdpSolution run(const SdpProblem& problem, const BoundOptions& options, const char* who) {
  SolverOptions so;
  so.tol = options.tol;
  so.max_iter = options.max_iter;
  SdpSolution sol = solve(problem, so);
  if (sol.status != SolveStatus::optimal) {
    std::ostringstream os;
    os << who << ": solver stopped with status " << to_string(sol.status) << " after "
       << sol.iterations << " iterations (" << sol.message << ", gap " << sol.gap << ")";
    throw SolverFailure(os.str(), problem, sol);
  }
  return sol;
}

SolverStats stats_of(const SdpProblem& problem, const SdpSolution& sol) {
  SolverStats s;
  s.status = sol.status;
  s.iterations = sol.iterations;
  s.primal_obj = sol.primal_obj;
  s.dual_obj = sol.dual_obj;
  s.constraints = problem.num_constraints();
  s.dropped = problem.dropped();
  s.block_dims = problem.block_dims();
  return s;
}

// The SDPs constrain trace(S X_j) = theta_j, so their optimum is the second
// moment of the estimates; the MSE bound is that minus |theta|^2.
double theta_norm2(const StatisticalModel& model) {
  double s = 0.0;
  for (double t : model.theta) s += t * t;
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::nagaoka_hayashi: return "nh";
    case BoundKind::holevo: return "holevo";
    case BoundKind::nh_u: return "nh_u";
  }
  return "unknown";
}

double unbiasedness_residual(const StatisticalModel& model, const std::vector<ComplexMatrix>& x) {
  if (static_cast<int>(x.size()) != model.num_params()) {
    throw InvalidArgument("unbiasedness_residual: wrong number of observables");
  }
  double worst = 0.0;
  for (int j = 0; j < model.num_params(); ++j) {
    worst = std::max(worst, std::abs(trace_product(model.state, x[j]) - model.theta[j]));
    for (int k = 0; k < model.num_params(); ++k) {
      const double target = j == k ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(trace_product(model.derivs[k], x[j]) - target));
    }
  }
  return worst;
}

BoundResult nagaoka_hayashi_bound(const StatisticalModel& model, const BoundOptions& options) {
  NhSdp sdp = build_nh_sdp(model, options);
  SdpSolution sol = run(sdp.problem, options, "nagaoka_hayashi_bound");
  NhRecovery rec = recover_nh(sdp.meta, sol.primal);
  BoundResult r;
  r.kind = BoundKind::nagaoka_hayashi;
  r.value = sol.primal_obj - theta_norm2(model);
  r.gap = sol.gap;
  r.x = std::move(rec.x);
  r.l = std::move(rec.l);
  r.stats = stats_of(sdp.problem, sol);
  if (options.verify) {
    const double res = unbiasedness_residual(model, r.x);
    if (res > kUnbiasedTol) {
      throw NumericalError("nagaoka_hayashi_bound: recovered X violates unbiasedness by " + fmt(res));
    }
    if (rec.schur_min_eig < -kSchurTol) {
      throw NumericalError("nagaoka_hayashi_bound: recovered [[L, X],[X', 1]] has eigenvalue " +
                           fmt(rec.schur_min_eig));
    }
  }
  r.solution = std::move(sol);
  return r;
}

BoundResult nh_u_bound(const ComplexMatrix& state, const std::vector<ComplexMatrix>& x,
                       const BoundOptions& options) {
  NhSdp sdp = build_nh_u_sdp(state, x, options);
  SdpSolution sol = run(sdp.problem, options, "nh_u_bound");
  NhRecovery rec = recover_nh(sdp.meta, sol.primal);
  BoundResult r;
  r.kind = BoundKind::nh_u;
  r.value = sol.primal_obj;
  r.gap = sol.gap;
  r.x = std::move(rec.x);
  r.l = std::move(rec.l);
  r.stats = stats_of(sdp.problem, sol);
  r.solution = std::move(sol);
  return r;
}

BoundResult holevo_bound(const StatisticalModel& model, const BoundOptions& options) {
  HolevoSdp sdp = build_holevo_sdp(model, options);
  SdpSolution sol = run(sdp.problem, options, "holevo_bound");
  const HolevoMetadata& meta = sdp.meta;
  const int n = meta.num_params;
  const int nfree = static_cast<int>(meta.nullspace.cols());
  RealVector v_coef = RealVector::Zero(meta.v_vars);
  RealMatrix z = RealMatrix::Zero(n, nfree);
  const auto& kept = sdp.problem.kept();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const int idx = kept[i];
    if (idx < meta.v_vars) {
      v_coef(idx) = sol.dual_y(i);
    } else {
      const int q = idx - meta.v_vars;
      z(q / nfree, q % nfree) = sol.dual_y(i);
    }
  }
  BoundResult r;
  r.kind = BoundKind::holevo;
  r.v = RealMatrix::Zero(n, n);
  int pos = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      r.v(a, b) = v_coef(pos);
      r.v(b, a) = v_coef(pos);
      ++pos;
    }
  }
  for (int j = 0; j < n; ++j) {
    RealVector coeff = meta.x0.row(j).transpose();
    if (nfree > 0) coeff += meta.nullspace * z.row(j).transpose();
    ComplexMatrix xj = ComplexMatrix::Zero(meta.dim, meta.dim);
    for (Eigen::Index a = 0; a < coeff.size(); ++a) xj += coeff(a) * meta.basis[a];
    r.x.push_back(hermitian_part(xj));
  }
  r.value = sol.dual_obj - theta_norm2(model);
  r.gap = sol.gap;
  r.stats = stats_of(sdp.problem, sol);
  const RealMatrix raw_v = r.v;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) r.v(a, b) -= model.theta[a] * model.theta[b];
  if (options.verify) {
    const double res = unbiasedness_residual(model, r.x);
    if (res > kUnbiasedTol) {
      throw NumericalError("holevo_bound: recovered X violates unbiasedness by " + fmt(res));
    }
    ComplexMatrix zmat(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) zmat(j, k) = trace_product(model.state, r.x[k] * r.x[j]);
    const double slack = min_eigenvalue(ComplexMatrix(hermitian_part(raw_v.cast<Complex>() - zmat)));
    if (slack < -kSchurTol * std::max(1.0, raw_v.trace())) {
      throw NumericalError("holevo_bound: recovered V - Z(X) has eigenvalue " + fmt(slack));
    }
  }
  r.solution = std::move(sol);
  return r;
}

double nagaoka_explicit_two_obs(const ComplexMatrix& state, const ComplexMatrix& x1,
                                const ComplexMatrix& x2) {
  const Eigen::Index d = state.rows();
  if (state.cols() != d || x1.rows() != d || x1.cols() != d || x2.rows() != d || x2.cols() != d) {
    throw InvalidArgument("nagaoka_explicit_two_obs: dimension mismatch");
  }
  for (const ComplexMatrix* m : {&state, &x1, &x2}) {
    if (!is_hermitian(*m, 1e-10)) throw InvalidArgument("nagaoka_explicit_two_obs: input is not Hermitian");
  }
  const ComplexMatrix root = psd_sqrt(hermitian_part(state));
  const ComplexMatrix comm = -kI * (x1 * x2 - x2 * x1);
  const double sym = trace_product(state, x1 * x1).real() + trace_product(state, x2 * x2).real();
  return sym + trace_abs(hermitian_part(root * comm * root));
}

}  // namespace qmb
