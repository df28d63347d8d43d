// Acceptance checks. One line per criterion; exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qmb/bounds.hpp"
#include "qmb/cli.hpp"
#include "qmb/linalg.hpp"
#include "qmb/measurement.hpp"
#include "qmb/model.hpp"

using namespace qmb;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Tracks the worst observed error and the first failing point.
class Tally {
 public:
  void check(bool ok, double err, const std::string& where) {
    worst_ = std::max(worst_, err);
    ++count_;
    if (!ok && pass_) {
      pass_ = false;
      first_ = where;
    }
  }
  void fail(const std::string& where) { check(false, 0.0, where); }
  Outcome outcome(const std::string& what) const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: %d checks, max err %.3g", what.c_str(), count_, worst_);
    std::string d = buf;
    if (!pass_) d += "; first failure at " + first_;
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  int count_ = 0;
  double worst_ = 0.0;
  std::string first_;
};

std::string at(const char* fmt, double a, double b = 0.0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

void within(Tally& t, double got, double want, double tol, const std::string& where) {
  const double err = std::abs(got - want);
  t.check(err <= tol, err, where + at(" (got %.10g, want %.10g)", got, want));
}

StatisticalModel ifo_n1(double a1sq, double eta) {
  const std::vector<Complex> amps = {std::sqrt(1.0 - a1sq), std::sqrt(a1sq)};
  return interferometer_model(amps, eta);
}

double ifo_n1_holevo(double a1sq, double eta) {
  const double a0sq = 1.0 - a1sq;
  if (std::sqrt(a1sq) < 1.0 / std::sqrt(2.0) && eta < (a0sq - a1sq) / (2.0 * a0sq))
    return (1.0 + 3.0 * eta - 4.0 * eta * eta * eta) / (4.0 * eta * a1sq);
  return (a0sq + eta * a1sq) * (1.0 + 4.0 * eta * (1.0 - eta) * a0sq) / (4.0 * eta * a0sq * a1sq);
}

Outcome criterion1() {
  Tally t;
  for (int i = 0; i <= 9; ++i) {
    const double eps = 0.1 * i;
    for (const char* p : {"x", "y"}) {
      const StatisticalModel m = phase_damping_model(eps, p);
      within(t, nagaoka_hayashi_bound(m).value, 1.0, 1e-6, at("nh eps=%.1f", eps) + " " + p);
      within(t, holevo_bound(m).value, 1.0, 1e-6, at("holevo eps=%.1f", eps) + " " + p);
    }
  }
  return t.outcome("c_NH = c_H = 1");
}

Outcome criterion2() {
  Tally t;
  for (int i = 0; i <= 9; ++i) {
    const double eps = 0.1 * i;
    const StatisticalModel m = phase_damping_model(eps, "xy");
    within(t, holevo_bound(m).value, 2.0, 1e-6, at("holevo eps=%.1f", eps));
    within(t, nagaoka_hayashi_bound(m).value, 4.0 / (2.0 - eps), 1e-6, at("nh eps=%.1f", eps));
  }
  return t.outcome("c_H = 2, c_NH = 4/(2-eps)");
}

Outcome criterion3() {
  Tally t;
  for (int i = 0; i <= 8; ++i) {
    const double eps = 0.1 * i;
    const double z = 1.0 / ((1.0 - eps) * (1.0 - eps));
    const StatisticalModel m = phase_damping_model(eps, "xyz");
    within(t, holevo_bound(m).value, 2.0 + z, 1e-6, at("holevo eps=%.1f", eps));
    within(t, nagaoka_hayashi_bound(m).value, 4.0 / (2.0 - eps) + z, 1e-6, at("nh eps=%.1f", eps));
  }
  return t.outcome("c_H = 2 + 1/(1-eps)^2, c_NH = 4/(2-eps) + 1/(1-eps)^2");
}

Outcome criterion4() {
  Tally t;
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(std::vector<std::string>{"fig1", "--steps", "50"}, out, err);
  if (code != 0) {
    t.fail("fig1 exit code " + std::to_string(code) + ": " + err.str());
    return t.outcome("fig1");
  }
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  if (line != "eps,prec_h1,prec_nh1,prec_h2,prec_nh2,prec_h3,prec_nh3") t.fail("header '" + line + "'");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
    if (v.size() != 7) {
      t.fail("row '" + line + "'");
      continue;
    }
    const double e = v[0];
    const double z = 1.0 / ((1.0 - e) * (1.0 - e));
    const double want[7] = {e, 1.0, 1.0, 1.0, (2.0 - e) / 2.0, 3.0 / (2.0 + z), 3.0 / (4.0 / (2.0 - e) + z)};
    for (int k = 1; k < 7; ++k) within(t, v[k], want[k], 1e-5, at("eps=%.4f column %.0f", e, k));
    ++rows;
  }
  if (rows != 50) t.fail(std::to_string(rows) + " rows");
  return t.outcome("fig1 preciseness curves at " + std::to_string(rows) + " points");
}

Outcome criterion5() {
  Tally t;
  for (double eps : {0.1, 0.4, 0.7}) {
    const StatisticalModel m = phase_damping_model(eps, "xy");
    for (double a : {0.2, 0.5})
      for (double b : {0.2, 0.5}) {
        const Estimator e = appendix_c_povm(eps, a, b);
        const std::string w = at("eps=%.1f a=%.1f", eps, a) + at(" b=%.1f", b);
        if (!validate_povm(e.povm).ok) t.fail(w + " invalid POVM");
        within(t, mse_matrix(m, e).trace(), 4.0 / (2.0 - eps), 1e-8, w + " mse trace");
        const double r = check_unbiased(m, e).max_residual;
        t.check(r < 1e-9, 0.0, w + at(" unbiasedness residual %.3g", r));
      }
    const StatisticalModel m3 = phase_damping_model(eps, "xyz");
    for (double delta : {0.05, 0.005}) {
      const Estimator e = appendix_c_split_povm(eps, delta);
      const std::string w = at("split eps=%.1f delta=%.3f", eps, delta);
      if (!validate_povm(e.povm).ok) t.fail(w + " invalid POVM");
      within(t, mse_matrix(m3, e)(2, 2), 1.0 / ((1.0 - eps) * (1.0 - eps) * (1.0 - 2.0 * delta)), 1e-9,
             w + " v_z");
      const double r = check_unbiased(m3, e).max_residual;
      t.check(r < 1e-9, 0.0, w + at(" unbiasedness residual %.3g", r));
    }
  }
  return t.outcome("five- and seven-outcome measurements saturate");
}

Outcome criterion6() {
  Tally t;
  int branch1 = 0;
  for (int i = 0; i < 10; ++i) {
    const double eta = 0.05 + 0.1 * i;
    for (double a1sq : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const StatisticalModel m = ifo_n1(a1sq, eta);
      const std::string w = at("eta=%.2f a1^2=%.1f", eta, a1sq);
      const double h = holevo_bound(m).value;
      const double closed = ifo_n1_holevo(a1sq, eta);
      within(t, h, closed, 1e-6, w + " holevo");
      within(t, nagaoka_hayashi_bound(m).value, h, 2e-6, w + " nh vs holevo");
      const double a0sq = 1.0 - a1sq;
      if (a1sq < 0.5 && eta < (a0sq - a1sq) / (2.0 * a0sq)) ++branch1;
    }
  }
  t.check(branch1 > 0 && branch1 < 50, 0.0, "grid misses a branch");
  // Four-outcome measurement on its validity grid.
  int valid = 0;
  for (double a1sq : {0.1, 0.2, 0.3, 0.4}) {
    const double a0sq = 1.0 - a1sq;
    const double edge = (a0sq - a1sq) / (2.0 * a0sq);
    for (int k = 1; k <= 10; ++k) {
      const double eta = edge * k / 10.0;
      AppendixDResult r;
      try {
        r = appendix_d_povm(std::sqrt(a0sq), std::sqrt(a1sq), eta);
      } catch (const InvalidArgument&) {
        continue;
      }
      ++valid;
      const StatisticalModel m = ifo_n1(a1sq, eta);
      const double deficit = mse_matrix(m, r.estimator).trace() - nagaoka_hayashi_bound(m).value;
      t.check(std::abs(deficit) < 1e-7, std::abs(deficit), at("measurement eta=%.4f a1^2=%.1f", eta, a1sq));
    }
  }
  t.check(valid >= 20, 0.0, "only " + std::to_string(valid) + " valid measurement points");
  return t.outcome("interferometer N=1 (" + std::to_string(branch1) + " first-branch points, " +
                   std::to_string(valid) + " measurement points)");
}

Outcome criterion7() {
  Tally t;
  for (int n : {2, 4, 6}) {
    const std::vector<Complex> amps = holland_burnett_probe(n);
    for (double eta : {0.3, 0.6, 0.9}) {
      const StatisticalModel m = interferometer_model(amps, eta);
      within(t, nagaoka_hayashi_bound(m).value, holevo_bound(m).value, 5e-6, at("N=%.0f eta=%.1f", n, eta));
    }
  }
  BoundOptions flat;
  flat.use_blocks = false;
  const std::vector<std::vector<Complex>> probes = {
      {std::sqrt(0.6), std::sqrt(0.4)},
      holland_burnett_probe(2),
      {0.5, Complex(0.5, 0.0), Complex(0.0, 0.5), 0.5},
  };
  for (const auto& amps : probes) {
    const StatisticalModel m = interferometer_model(amps, 0.7, 0.2);
    const double n = double(amps.size() - 1);
    within(t, nagaoka_hayashi_bound(m).value, nagaoka_hayashi_bound(m, flat).value, 1e-6,
           at("block vs full nh N=%.0f", n));
    within(t, holevo_bound(m).value, holevo_bound(m, flat).value, 1e-6, at("block vs full holevo N=%.0f", n));
  }
  return t.outcome("Holland-Burnett N in {2,4,6}; block vs full at N <= 3");
}

Outcome criterion8() {
  Tally t;
  BoundOptions opts;
  for (std::uint64_t s = 0; s < 25; ++s) {
    const int d = 2 + static_cast<int>(s % 3);
    const int n = 1 + static_cast<int>((s / 3) % 3);
    const StatisticalModel m = random_model(1000 + s, d, n);
    const std::string w = at("seed=%.0f d=%.0f", double(1000 + s), d) + " n=" + std::to_string(n);
    const double sld = sld_bound(m).value;
    const BoundResult h = holevo_bound(m, opts);
    const BoundResult nh = nagaoka_hayashi_bound(m, opts);
    t.check(sld <= h.value + 1e-6, std::max(0.0, sld - h.value), w + " sld > holevo");
    t.check(h.value <= nh.value + 2e-6, std::max(0.0, h.value - nh.value), w + " holevo > nh");
    t.check(h.gap <= 1e-7, h.gap, w + " holevo gap");
    t.check(nh.gap <= 1e-7, nh.gap, w + " nh gap");
    // Certificates are checked against freshly built programs.
    const CertificateReport ch = check_certificate(build_holevo_sdp(m, opts).problem, h.solution, 1e-7);
    const CertificateReport cn = check_certificate(build_nh_sdp(m, opts).problem, nh.solution, 1e-7);
    t.check(ch.passed(), 0.0, w + " holevo certificate " + ch.summary());
    t.check(cn.passed(), 0.0, w + " nh certificate " + cn.summary());
  }
  return t.outcome("ordering and certificates on 25 random models");
}

Outcome criterion9() {
  Tally t;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const int d = 2 + static_cast<int>(s % 3);
    StatisticalModel m = random_model(2000 + s, d, 2);
    const BoundResult nh = nagaoka_hayashi_bound(m);
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    const double explicit_value =
        nagaoka_explicit_two_obs(m.state, nh.x[0] - m.theta[0] * id, nh.x[1] - m.theta[1] * id);
    within(t, nh.value, explicit_value, 1e-5, at("seed=%.0f d=%.0f", double(2000 + s), d));
  }
  return t.outcome("c_NH equals the two-observable closed form at the optimizers");
}

Outcome criterion10() {
  Tally t;
  for (int i = 0; i <= 10; ++i) {
    const double eps = 0.1 * i;
    const RealSymmetricMatrix f = sld(phase_damping_model(eps, "xy")).fisher;
    double off = std::abs(f(0, 1));
    if (eps < 1.0) {
      const RealSymmetricMatrix g = sld(phase_damping_model(eps, "xyz")).fisher;
      off = std::max({off, std::abs(g(0, 1)), std::abs(g(0, 2)), std::abs(g(1, 2))});
    }
    t.check(off < 1e-9, off, at("eps=%.1f", eps));
  }
  return t.outcome("SLD Fisher matrix is diagonal");
}

struct Criterion {
  int id;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, 1.0, criterion1},  {2, 5.0, criterion2},   {3, 10.0, criterion3}, {4, 20.0, criterion4},
      {5, 2.0, criterion5},  {6, 60.0, criterion6},  {7, 600.0, criterion7}, {8, 300.0, criterion8},
      {9, 60.0, criterion9}, {10, 1.0, criterion10},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d: %s  %s [%.2f s of %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed;
}
