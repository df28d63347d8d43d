#include "qmb/model.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "qmb/error.hpp"

namespace qmb {

namespace {

constexpr double kModelTol = 1e-10;
constexpr double kBlockTol = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// x^p with 0^0 = 1 and the convention that a zero exponent never produces NaN.
double ipow(double x, double p) { return p == 0.0 ? 1.0 : std::pow(x, p); }

}  // namespace

std::vector<int> block_sizes_or_whole(const StatisticalModel& model) {
  if (model.blocks.empty()) return {model.dim};
  return model.blocks;
}

void StatisticalModel::validate() const {
  if (dim < 1) throw InvalidArgument("model: dim must be >= 1");
  if (state.rows() != dim || state.cols() != dim) {
    throw InvalidArgument("model: state must be " + std::to_string(dim) + "x" +
                          std::to_string(dim));
  }
  if (derivs.empty()) throw InvalidArgument("model: at least one parameter required");
  if (theta.size() != derivs.size()) {
    throw InvalidArgument("model: theta has " + std::to_string(theta.size()) +
                          " entries, expected " + std::to_string(derivs.size()));
  }
  if (labels.size() != derivs.size()) {
    throw InvalidArgument("model: labels has " + std::to_string(labels.size()) +
                          " entries, expected " + std::to_string(derivs.size()));
  }
  if (max_abs(state - state.adjoint()) > kModelTol) {
    throw InvalidArgument("model: state is not Hermitian");
  }
  const double tr = state.trace().real();
  if (std::abs(tr - 1.0) > kModelTol) {
    throw InvalidArgument("model: state trace is " + fmt(tr) + ", expected 1");
  }
  const double lmin = min_eigenvalue(ComplexMatrix(hermitian_part(state)));
  if (lmin < -kModelTol) {
    throw InvalidArgument("model: state has negative eigenvalue " + fmt(lmin));
  }
  for (std::size_t j = 0; j < derivs.size(); ++j) {
    const ComplexMatrix& d = derivs[j];
    const std::string name = "model: derivative " + std::to_string(j);
    if (d.rows() != dim || d.cols() != dim) throw InvalidArgument(name + " has wrong dimension");
    if (max_abs(d - d.adjoint()) > kModelTol) throw InvalidArgument(name + " is not Hermitian");
    if (std::abs(d.trace()) > kModelTol) {
      throw InvalidArgument(name + " is not traceless (trace " + fmt(std::abs(d.trace())) + ")");
    }
  }
  if (!blocks.empty()) {
    int total = 0;
    for (int b : blocks) {
      if (b < 1) throw InvalidArgument("model: block sizes must be positive");
      total += b;
    }
    if (total != dim) throw InvalidArgument("model: block sizes do not sum to dim");
    std::vector<int> owner(dim);
    int off = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (int i = 0; i < blocks[b]; ++i) owner[off + i] = static_cast<int>(b);
      off += blocks[b];
    }
    auto check = [&](const ComplexMatrix& m, const std::string& what) {
      for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) {
          if (owner[i] != owner[k] && std::abs(m(i, k)) > kBlockTol) {
            throw InvalidArgument("model: " + what + " has off-block entry (" +
                                  std::to_string(i) + "," + std::to_string(k) + ")");
          }
        }
      }
    };
    check(state, "state");
    for (std::size_t j = 0; j < derivs.size(); ++j) check(derivs[j], "derivative " + std::to_string(j));
  }
}

StatisticalModel phase_damping_model(double epsilon, std::string_view params) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidArgument("phase_damping_model: epsilon must lie in [0, 1]");
  }
  if (params.empty()) throw InvalidArgument("phase_damping_model: params must be nonempty");

  const double c = 1.0 - epsilon;
  StatisticalModel m;
  m.dim = 4;
  m.state = ComplexMatrix::Zero(4, 4);
  m.state(1, 1) = 0.5;
  m.state(2, 2) = 0.5;
  m.state(1, 2) = 0.5 * c;
  m.state(2, 1) = 0.5 * c;

  ComplexMatrix dx = ComplexMatrix::Zero(4, 4);
  dx(0, 1) = -kI;
  dx(0, 2) = -kI * c;
  dx(1, 3) = kI * c;
  dx(2, 3) = kI;
  dx = (dx + ComplexMatrix(dx.adjoint())) * 0.25;

  ComplexMatrix dy = ComplexMatrix::Zero(4, 4);
  dy(0, 1) = -1.0;
  dy(0, 2) = -c;
  dy(1, 3) = c;
  dy(2, 3) = 1.0;
  dy = (dy + ComplexMatrix(dy.adjoint())) * 0.25;

  ComplexMatrix dz = ComplexMatrix::Zero(4, 4);
  dz(1, 2) = -kI * c * 0.5;
  dz(2, 1) = kI * c * 0.5;

  std::string seen;
  for (char p : params) {
    if (seen.find(p) != std::string::npos) {
      throw InvalidArgument(std::string("phase_damping_model: duplicate parameter '") + p + "'");
    }
    seen.push_back(p);
    switch (p) {
      case 'x': m.derivs.push_back(dx); break;
      case 'y': m.derivs.push_back(dy); break;
      case 'z': m.derivs.push_back(dz); break;
      default:
        throw InvalidArgument(std::string("phase_damping_model: unknown parameter '") + p + "'");
    }
    m.theta.push_back(0.0);
    m.labels.push_back(std::string("theta_") + p);
  }
  return m;
}

std::vector<Complex> holland_burnett_probe(int n_photons) {
  if (n_photons < 2 || n_photons % 2 != 0) {
    throw InvalidArgument("holland_burnett_probe: N must be even and >= 2");
  }
  const int n = n_photons;
  // a^+ b + a b^+ on |k, N-k>, k = 0..N
  ComplexMatrix h = ComplexMatrix::Zero(n + 1, n + 1);
  for (int k = 0; k < n; ++k) {
    const double amp = std::sqrt(static_cast<double>((k + 1) * (n - k)));
    h(k + 1, k) = amp;
    h(k, k + 1) = amp;
  }
  const HermitianEigen eig = herm_eig(h);
  const double angle = M_PI / 4.0;
  ComplexVector phases(n + 1);
  for (int i = 0; i <= n; ++i) phases(i) = std::exp(-kI * angle * eig.values(i));
  const ComplexMatrix u = eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();

  std::vector<Complex> a(n + 1);
  for (int k = 0; k <= n; ++k) a[k] = u(k, n / 2);
  for (auto& v : a) {
    if (std::abs(v) < 1e-14) v = 0.0;
  }
  double norm = 0.0;
  for (const auto& v : a) norm += std::norm(v);
  norm = std::sqrt(norm);
  Complex phase = 1.0;
  for (const auto& v : a) {
    if (v != 0.0) {
      phase = std::conj(v) / std::abs(v);
      break;
    }
  }
  for (auto& v : a) v *= phase / norm;
  return a;
}

StatisticalModel interferometer_model(std::span<const Complex> amplitudes, double eta,
                                      double phi) {
  if (amplitudes.size() < 2) {
    throw InvalidArgument("interferometer_model: need at least two amplitudes (N >= 1)");
  }
  double norm = 0.0;
  for (const auto& a : amplitudes) norm += std::norm(a);
  if (std::abs(norm - 1.0) > 1e-10) {
    throw InvalidArgument("interferometer_model: amplitudes are not normalized (sum |a|^2 = " +
                          fmt(norm) + ")");
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw InvalidArgument("interferometer_model: eta must lie in (0, 1]");
  }
  const int n = static_cast<int>(amplitudes.size()) - 1;
  const int dim = (n + 1) * (n + 2) / 2;

  StatisticalModel m;
  m.dim = dim;
  m.state = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix d_phi = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix d_eta = ComplexMatrix::Zero(dim, dim);

  int offset = 0;
  for (int l = n; l >= 0; --l) {
    const int size = n - l + 1;
    m.blocks.push_back(size);
    for (int k = l; k <= n; ++k) {
      for (int kp = l; kp <= n; ++kp) {
        const double cc = std::sqrt(binomial(k, l) * binomial(kp, l));
        const double e = 0.5 * (k + kp) - l;
        const double g = cc * ipow(eta, e) * ipow(1.0 - eta, l);
        double dg = 0.0;
        if (e != 0.0) dg += cc * e * ipow(eta, e - 1.0) * ipow(1.0 - eta, l);
        if (l != 0) dg -= cc * l * ipow(eta, e) * ipow(1.0 - eta, l - 1);
        const Complex phase = std::exp(kI * static_cast<double>(k - kp) * phi);
        const Complex amp = amplitudes[k] * std::conj(amplitudes[kp]) * phase;
        const int r = offset + (k - l);
        const int c = offset + (kp - l);
        m.state(r, c) = amp * g;
        d_eta(r, c) = amp * dg;
        d_phi(r, c) = kI * static_cast<double>(k - kp) * amp * g;
      }
    }
    offset += size;
  }
  m.derivs = {d_phi, d_eta};
  m.theta = {phi, eta};
  m.labels = {"phi", "eta"};
  return m;
}

StatisticalModel random_model(std::uint64_t seed, int dim, int num_params) {
  if (dim < 2) throw InvalidArgument("random_model: dim must be >= 2");
  if (num_params < 1) throw InvalidArgument("random_model: need at least one parameter");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  auto gaussian = [&](int r, int c) {
    ComplexMatrix g(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) g(i, j) = Complex(normal(rng), normal(rng));
    return g;
  };

  StatisticalModel m;
  m.dim = dim;
  const ComplexMatrix g = gaussian(dim, dim);
  ComplexMatrix s = g * g.adjoint() + 0.1 * ComplexMatrix::Identity(dim, dim);
  s = hermitian_part(s);
  m.state = s / s.trace().real();
  for (int j = 0; j < num_params; ++j) {
    ComplexMatrix h = hermitian_part(gaussian(dim, dim));
    h -= ComplexMatrix::Identity(dim, dim) * (h.trace() / static_cast<double>(dim));
    h *= 0.5 / h.norm();
    m.derivs.push_back(hermitian_part(h));
    m.theta.push_back(uniform(rng));
    m.labels.push_back("p" + std::to_string(j));
  }
  return m;
}

SLDData sld(const StatisticalModel& model) {
  model.validate();
  const HermitianEigen eig = herm_eig(model.state);
  const int d = model.dim;
  const int n = model.num_params();
  SLDData out;
  for (const auto& deriv : model.derivs) {
    const ComplexMatrix dt = eig.vectors.adjoint() * deriv * eig.vectors;
    ComplexMatrix lt = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) {
        const double s = eig.values(i) + eig.values(k);
        if (s > kPsdClampTol) lt(i, k) = 2.0 * dt(i, k) / s;
      }
    }
    out.operators.push_back(hermitian_part(eig.vectors * lt * eig.vectors.adjoint()));
  }
  out.fisher = RealSymmetricMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k <= j; ++k) {
      const ComplexMatrix ljk = out.operators[j] * out.operators[k];
      const double v = trace_product(model.state, ljk).real();
      out.fisher(j, k) = v;
      out.fisher(k, j) = v;
    }
  }
  return out;
}

SldBound sld_bound(const StatisticalModel& model, bool accept_singular) {
  const SLDData data = sld(model);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(data.fisher);
  if (es.info() != Eigen::Success) throw NumericalError("sld_bound: eigensolver failed");
  const RealVector& ev = es.eigenvalues();
  const double cutoff = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  SldBound result;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) {
      result.value += 1.0 / ev(i);
    } else {
      result.pseudo_inverse = true;
    }
  }
  if (result.pseudo_inverse && !accept_singular) {
    throw NumericalError("sld_bound: SLD Fisher matrix is singular (min eigenvalue " +
                         fmt(ev(0)) + ")");
  }
  return result;
}

StatisticalModel permute_params(const StatisticalModel& model, std::span<const int> order) {
  if (static_cast<int>(order.size()) != model.num_params()) {
    throw InvalidArgument("permute_params: order has wrong length");
  }
  StatisticalModel out = model;
  out.derivs.clear();
  out.theta.clear();
  out.labels.clear();
  std::vector<bool> used(order.size(), false);
  for (int j : order) {
    if (j < 0 || j >= model.num_params() || used[j]) {
      throw InvalidArgument("permute_params: order is not a permutation");
    }
    used[j] = true;
    out.derivs.push_back(model.derivs[j]);
    out.theta.push_back(model.theta[j]);
    out.labels.push_back(model.labels[j]);
  }
  return out;
}

}  // namespace qmb
