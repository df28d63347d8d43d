#include "builder_util.hpp"

#include <cmath>

#include "qmb/bounds.hpp"

namespace qmb::detail {

namespace {
constexpr double kDropTol = 1e-15;
}

void RealifiedWriter::entry(int p, int q, Complex c) {
  const double a = c.real();
  const double b = c.imag();
  if (std::abs(a) > kDropTol) {
    out_.add(block_, p, q, a);
    out_.add(block_, p + k_, q + k_, a);
  }
  if (std::abs(b) > kDropTol && p != q) {
    out_.add(block_, p, q + k_, -b);
    out_.add(block_, q, p + k_, b);
  }
}

void RealifiedWriter::diag_block(const ComplexMatrix& h, int o) {
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    entry(o + i, o + i, Complex(h(i, i).real(), 0.0));
    for (Eigen::Index j = i + 1; j < h.cols(); ++j) entry(o + i, o + j, h(i, j));
  }
}

void RealifiedWriter::offdiag_block(const ComplexMatrix& g, int ro, int co) {
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) entry(ro + i, co + j, g(i, j));
  }
}

std::vector<SectorRange> model_sectors(const StatisticalModel& model, bool use_blocks) {
  std::vector<SectorRange> out;
  if (!use_blocks || model.blocks.empty()) {
    out.push_back({0, model.dim});
    return out;
  }
  int off = 0;
  for (int b : model.blocks) {
    out.push_back({off, b});
    off += b;
  }
  return out;
}

std::vector<ComplexMatrix> full_basis(int k) {
  if (k == 1) return {ComplexMatrix::Ones(1, 1)};
  return gellmann_basis(k).ops;
}

SupportFrame support_frame(const ComplexMatrix& s) {
  const HermitianEigen eig = herm_eig(s);
  const int d = static_cast<int>(s.rows());
  SupportFrame f;
  f.u.resize(d, d);
  f.values.resize(d);
  for (int i = 0; i < d; ++i) {
    f.u.col(i) = eig.vectors.col(d - 1 - i);
    f.values(i) = eig.values(d - 1 - i);
    if (f.values(i) > kRankTol) ++f.rank;
  }
  return f;
}

}  // namespace qmb::detail
