#include "qmb/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "qmb/bounds.hpp"
#include "qmb/error.hpp"
#include "qmb/measurement.hpp"
#include "qmb/model_json.hpp"
#include "qmb/povm_json.hpp"
#include "qmb/sdp.hpp"

namespace qmb {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json json_num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct ModelSpec {
  std::string builtin = "pd";
  std::string file;
  double eps = 0.5;
  std::string params = "xy";
  int photons = 1;
  double a1sq = 0.3;
  double eta = 0.5;
  double phi = 0.0;
  std::vector<double> amps;
};

struct SolveSpec {
  double tol = 1e-8;
  int max_iter = 200;
  std::string layout = "auto";
  bool no_rank_reduction = false;
  bool no_blocks = false;
  std::string bounds = "sld,holevo,nh";
  std::string format = "csv";
  std::string output;
};

void add_model_options(CLI::App* app, ModelSpec& m) {
  app->add_option("--model", m.builtin, "builtin model: pd, ifo or hb");
  app->add_option("--model-file", m.file, "model JSON file (overrides --model)");
  app->add_option("--eps", m.eps, "phase-damping strength (pd)");
  app->add_option("--params", m.params, "subset of xyz (pd)");
  app->add_option("--N", m.photons, "photon number (ifo, hb)");
  app->add_option("--a1sq", m.a1sq, "a_1^2 of the one-photon probe (ifo, N=1)");
  app->add_option("--amps", m.amps, "real probe amplitudes a_0..a_N (ifo)")->delimiter(',');
  app->add_option("--eta", m.eta, "transmissivity (ifo, hb)");
  app->add_option("--phi", m.phi, "phase (ifo, hb)");
}

void add_solve_options(CLI::App* app, SolveSpec& s, bool with_bounds) {
  app->add_option("--tol", s.tol, "solver tolerance, in (0, 1e-2]");
  app->add_option("--max-iter", s.max_iter, "solver iteration cap");
  app->add_option("--layout", s.layout, "NH layout: auto, full, quotient or support");
  app->add_flag("--no-rank-reduction", s.no_rank_reduction, "use the full operator basis");
  app->add_flag("--no-blocks", s.no_blocks, "ignore the model's block structure");
  if (with_bounds) app->add_option("--bounds", s.bounds, "comma list of sld, holevo, nh");
  app->add_option("--format", s.format, "csv or json");
  app->add_option("--output,-o", s.output, "write to a file instead of stdout");
}

void check_solve_spec(const SolveSpec& s) {
  if (!(s.tol > 0.0 && s.tol <= 1e-2)) throw InvalidArgument("--tol must lie in (0, 1e-2]");
  if (s.max_iter < 1) throw InvalidArgument("--max-iter must be >= 1");
  if (s.format != "csv" && s.format != "json") throw InvalidArgument("--format must be csv or json");
}

BoundOptions bound_options(const SolveSpec& s) {
  BoundOptions o;
  o.tol = s.tol;
  o.max_iter = s.max_iter;
  o.rank_reduction = !s.no_rank_reduction;
  o.use_blocks = !s.no_blocks;
  if (s.layout == "auto") {
    o.layout = NhLayout::automatic;
  } else if (s.layout == "full") {
    o.layout = NhLayout::full;
  } else if (s.layout == "quotient") {
    o.layout = NhLayout::quotient;
  } else if (s.layout == "support") {
    o.layout = NhLayout::support;
  } else {
    throw InvalidArgument("--layout must be auto, full, quotient or support");
  }
  return o;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

StatisticalModel make_model(const ModelSpec& m) {
  if (!m.file.empty()) return load_model_file(m.file);
  if (m.builtin == "pd") return phase_damping_model(m.eps, m.params);
  if (m.builtin == "ifo") {
    std::vector<Complex> amps;
    if (!m.amps.empty()) {
      for (double a : m.amps) amps.emplace_back(a, 0.0);
      double norm = 0.0;
      for (const auto& a : amps) norm += std::norm(a);
      if (!(norm > 0.0)) throw InvalidArgument("--amps must not be all zero");
      for (auto& a : amps) a /= std::sqrt(norm);
    } else {
      if (m.photons != 1) throw InvalidArgument("ifo with N > 1 needs --amps");
      if (!(m.a1sq > 0.0 && m.a1sq < 1.0)) throw InvalidArgument("--a1sq must lie in (0, 1)");
      amps = {Complex(std::sqrt(1.0 - m.a1sq), 0.0), Complex(std::sqrt(m.a1sq), 0.0)};
    }
    return interferometer_model(amps, m.eta, m.phi);
  }
  if (m.builtin == "hb") {
    const std::vector<Complex> amps = holland_burnett_probe(m.photons);
    return interferometer_model(amps, m.eta, m.phi);
  }
  throw InvalidArgument("unknown builtin model '" + m.builtin + "' (expected pd, ifo or hb)");
}

struct BoundRow {
  std::string bound;
  double value = std::nan("");
  double gap = std::nan("");
  std::string status;
  int iterations = 0;
  bool ok = false;
  double wall_ms = 0.0;
  std::string message;
};

BoundRow compute_bound(const std::string& which, const StatisticalModel& model,
                       const BoundOptions& opts) {
  BoundRow row;
  row.bound = which;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (which == "sld") {
      const SldBound s = sld_bound(model, true);
      row.value = s.value;
      row.gap = 0.0;
      row.status = s.pseudo_inverse ? "pseudo_inverse" : "closed_form";
      row.ok = !s.pseudo_inverse;
    } else if (which == "holevo" || which == "nh") {
      const BoundResult r = which == "nh" ? nagaoka_hayashi_bound(model, opts) : holevo_bound(model, opts);
      row.value = r.value;
      row.gap = r.gap;
      row.status = std::string(to_string(r.stats.status));
      row.iterations = r.stats.iterations;
      row.ok = r.stats.status == SolveStatus::optimal && r.gap <= opts.tol;
    } else {
      throw InvalidArgument("unknown bound '" + which + "' (expected sld, holevo or nh)");
    }
  } catch (const SolverFailure& e) {
    row.status = std::string(to_string(e.solution().status));
    row.iterations = e.solution().iterations;
    row.gap = e.solution().gap;
    row.message = e.what();
  } catch (const InvalidArgument&) {
    throw;
  } catch (const NumericalError& e) {
    row.status = "verification_failed";
    row.message = e.what();
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int worker_count(std::size_t jobs) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("QMB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

// Runs job(i) for i in [0, count) on a small pool. Results are written by
// index, so output order never depends on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job) {
  const int workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InvalidArgument("cannot write '" + path + "'");
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

void write_table(std::ostream& out, const std::string& format, const std::vector<std::string>& header,
                 const std::vector<std::vector<json>>& rows) {
  if (format == "json") {
    json doc = json::array();
    for (const auto& r : rows) {
      json obj = json::object();
      for (std::size_t c = 0; c < header.size(); ++c) obj[header[c]] = r[c];
      doc.push_back(std::move(obj));
    }
    out << doc.dump(1) << "\n";
    return;
  }
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << (c ? "," : "");
      const json& v = r[c];
      if (v.is_null()) {
        out << "nan";
      } else if (v.is_number_float()) {
        out << num(v.get<double>());
      } else if (v.is_string()) {
        out << v.get<std::string>();
      } else {
        out << v.dump();
      }
    }
    out << "\n";
  }
}

void dump_sdps(const StatisticalModel& model, const BoundOptions& opts,
               const std::vector<std::string>& bounds, const std::string& prefix) {
  for (const auto& b : bounds) {
    std::string text;
    if (b == "nh") {
      text = write_sdpa(build_nh_sdp(model, opts).problem);
    } else if (b == "holevo") {
      text = write_sdpa(build_holevo_sdp(model, opts).problem);
    } else {
      continue;
    }
    const std::string path = prefix + "_" + b + ".dat-s";
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot write '" + path + "'");
    f << text;
  }
}

int cmd_bounds(const ModelSpec& ms, const SolveSpec& ss, const std::string& dump_prefix,
               std::ostream& out, std::ostream& err) {
  check_solve_spec(ss);
  const BoundOptions opts = bound_options(ss);
  const StatisticalModel model = make_model(ms);
  const std::vector<std::string> bounds = split_list(ss.bounds);
  if (bounds.empty()) throw InvalidArgument("--bounds must name at least one bound");
  if (!dump_prefix.empty()) dump_sdps(model, opts, bounds, dump_prefix);
  std::vector<BoundRow> rows;
  for (const auto& b : bounds) rows.push_back(compute_bound(b, model, opts));
  std::vector<std::vector<json>> table;
  bool all_ok = true;
  for (const auto& r : rows) {
    all_ok = all_ok && r.ok;
    if (!r.message.empty()) err << r.bound << ": " << r.message << "\n";
    table.push_back({r.bound, json_num(r.value), json_num(r.gap), r.status, r.iterations, r.ok,
                     r.wall_ms});
  }
  Sink sink(ss.output, out);
  write_table(sink.stream(), ss.format,
              {"bound", "value", "gap", "status", "iterations", "ok", "wall_ms"}, table);
  return all_ok ? kExitOk : kExitFailure;
}

struct Axis {
  std::string name;
  std::vector<double> values;
};

std::vector<double> linspace(double a, double b, int steps) {
  std::vector<double> v;
  if (steps == 1) return {a};
  for (int i = 0; i < steps; ++i) v.push_back(a + (b - a) * static_cast<double>(i) / (steps - 1));
  return v;
}

Axis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw InvalidArgument("--grid expects NAME=START:STOP:STEPS, got '" + spec + "'");
  Axis ax;
  ax.name = spec.substr(0, eq);
  if (ax.name != "eps" && ax.name != "eta" && ax.name != "a1sq" && ax.name != "phi") {
    throw InvalidArgument("--grid parameter must be eps, eta, a1sq or phi");
  }
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;
  char tail = 0;
  if (std::sscanf(spec.c_str() + eq + 1, "%lf:%lf:%d%c", &start, &stop, &steps, &tail) != 3) {
    throw InvalidArgument("--grid expects NAME=START:STOP:STEPS, got '" + spec + "'");
  }
  if (steps < 1) throw InvalidArgument("--grid steps must be >= 1");
  ax.values = linspace(start, stop, steps);
  return ax;
}

void set_axis(ModelSpec& m, const std::string& name, double v) {
  if (name == "eps") m.eps = v;
  if (name == "eta") m.eta = v;
  if (name == "a1sq") m.a1sq = v;
  if (name == "phi") m.phi = v;
}

int cmd_sweep(const ModelSpec& ms, const SolveSpec& ss, const std::vector<std::string>& grid,
              std::ostream& out, std::ostream& err) {
  check_solve_spec(ss);
  if (!ms.file.empty()) throw InvalidArgument("sweep needs a builtin model");
  if (grid.empty()) throw InvalidArgument("sweep needs at least one --grid");
  const BoundOptions opts = bound_options(ss);
  std::vector<Axis> axes;
  for (const auto& g : grid) axes.push_back(parse_axis(g));
  const std::vector<std::string> bounds = split_list(ss.bounds);
  if (bounds.empty()) throw InvalidArgument("--bounds must name at least one bound");

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<ModelSpec> points(total, ms);
  std::vector<std::vector<double>> coords(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    coords[i].resize(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      const std::size_t idx = rest % axes[k].values.size();
      rest /= axes[k].values.size();
      coords[i][k] = axes[k].values[idx];
      set_axis(points[i], axes[k].name, coords[i][k]);
    }
  }
  // Validate every grid point up front so bad input exits 2 before solving.
  for (const auto& p : points) make_model(p);

  std::vector<std::vector<BoundRow>> results(total);
  parallel_for(total, [&](std::size_t i) {
    const StatisticalModel model = make_model(points[i]);
    for (const auto& b : bounds) results[i].push_back(compute_bound(b, model, opts));
  });

  std::vector<std::string> header = {"index"};
  for (const auto& a : axes) header.push_back(a.name);
  for (const auto& b : bounds) {
    header.push_back(b);
    header.push_back(b + "_gap");
  }
  header.push_back("ok");
  std::vector<std::vector<json>> table;
  bool all_ok = true;
  for (std::size_t i = 0; i < total; ++i) {
    std::vector<json> row = {static_cast<int>(i)};
    for (double c : coords[i]) row.push_back(c);
    bool ok = true;
    for (const auto& r : results[i]) {
      row.push_back(json_num(r.value));
      row.push_back(json_num(r.gap));
      ok = ok && r.ok;
      if (!r.message.empty()) err << "point " << i << " " << r.bound << ": " << r.message << "\n";
    }
    row.push_back(ok);
    all_ok = all_ok && ok;
    table.push_back(std::move(row));
  }
  Sink sink(ss.output, out);
  write_table(sink.stream(), ss.format, header, table);
  return all_ok ? kExitOk : kExitFailure;
}

int cmd_fig1(const SolveSpec& ss, int steps, double eps_min, double eps_max, std::ostream& out,
             std::ostream& err) {
  check_solve_spec(ss);
  if (steps < 1) throw InvalidArgument("--steps must be >= 1");
  if (!(eps_min >= 0.0 && eps_min < 1.0 && eps_max >= 0.0 && eps_max < 1.0)) {
    throw InvalidArgument("fig1 grid must lie in [0, 1)");
  }
  const BoundOptions opts = bound_options(ss);
  const std::vector<double> grid = linspace(eps_min, eps_max, steps);
  static const char* const kParams[] = {"x", "xy", "xyz"};
  // One job per (eps, n, bound); 6 per grid point.
  std::vector<BoundRow> results(grid.size() * 6);
  parallel_for(results.size(), [&](std::size_t job) {
    const std::size_t i = job / 6;
    const int n = static_cast<int>(job % 6) / 2;
    const bool nh = job % 2 == 1;
    const StatisticalModel model = phase_damping_model(grid[i], kParams[n]);
    results[job] = compute_bound(nh ? "nh" : "holevo", model, opts);
  });
  std::vector<std::vector<json>> table;
  bool all_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<json> row = {grid[i]};
    for (int k = 0; k < 6; ++k) {
      const BoundRow& r = results[i * 6 + k];
      const int n = k / 2 + 1;
      all_ok = all_ok && r.ok;
      if (!r.message.empty()) err << "eps " << num(grid[i]) << " " << r.bound << ": " << r.message << "\n";
      row.push_back(r.ok ? json(n / r.value) : json(nullptr));
    }
    table.push_back(std::move(row));
  }
  Sink sink(ss.output, out);
  write_table(sink.stream(), ss.format,
              {"eps", "prec_h1", "prec_nh1", "prec_h2", "prec_nh2", "prec_h3", "prec_nh3"}, table);
  return all_ok ? kExitOk : kExitFailure;
}

struct PovmSpec {
  std::string builtin;
  std::string file;
  double a = 0.5;
  double b = 0.5;
  bool split = false;
  double delta = 0.0;
  bool boundary = false;
  bool projective = false;
  std::string bound;
};

int cmd_verify_povm(ModelSpec ms, const SolveSpec& ss, const PovmSpec& ps, std::ostream& out,
                    std::ostream& err) {
  check_solve_spec(ss);
  const BoundOptions opts = bound_options(ss);
  Estimator est;
  StatisticalModel model;
  std::string bound = ps.bound;
  std::vector<std::vector<json>> table;
  if (ps.builtin == "appendix-c") {
    if (ps.delta > 0.0) {
      est = appendix_c_split_povm(ms.eps, ps.delta);
    } else {
      est = appendix_c_povm(ms.eps, ps.a, ps.b, ps.split);
    }
    model = phase_damping_model(ms.eps, est.num_params() == 3 ? "xyz" : "xy");
    if (bound.empty()) bound = "nh";
  } else if (ps.builtin == "appendix-d") {
    if (!(ms.a1sq > 0.0 && ms.a1sq < 1.0)) throw InvalidArgument("--a1sq must lie in (0, 1)");
    const double a1 = std::sqrt(ms.a1sq);
    const double a0 = std::sqrt(1.0 - ms.a1sq);
    if (ps.boundary) ms.eta = (a0 * a0 - a1 * a1) / (2.0 * a0 * a0);
    if (ps.projective) {
      est = appendix_d_projective(a0, a1, ms.eta);
    } else {
      const AppendixDResult r = appendix_d_povm(a0, a1, ms.eta);
      est = r.estimator;
      table.push_back({"boundary", r.boundary});
      table.push_back({"eta_below_half_difference", r.below_half_difference});
      table.push_back({"eta_below_branch_condition", r.below_branch_condition});
    }
    model = interferometer_model(std::vector<Complex>{a0, a1}, ms.eta, 0.0);
    table.insert(table.begin(), {"eta", ms.eta});
    if (bound.empty()) bound = "holevo";
  } else if (!ps.file.empty()) {
    est = load_estimator_file(ps.file);
    model = make_model(ms);
    if (bound.empty()) bound = "nh";
  } else {
    throw InvalidArgument("verify-povm needs --povm appendix-c|appendix-d or --povm-file");
  }
  if (bound != "nh" && bound != "holevo" && bound != "none") {
    throw InvalidArgument("--bound must be nh, holevo or none");
  }

  bool ok = true;
  const PovmReport rep = validate_povm(est.povm);
  table.push_back({"outcomes", est.povm.size()});
  table.push_back({"valid", rep.ok});
  double lo = rep.min_eigenvalues.empty() ? 0.0 : rep.min_eigenvalues.front();
  for (double v : rep.min_eigenvalues) lo = std::min(lo, v);
  table.push_back({"min_eigenvalue", lo});
  table.push_back({"completeness_residual", rep.completeness_residual});
  if (!rep.ok) {
    err << "invalid POVM: " << rep.failure << "\n";
    ok = false;
  } else {
    const UnbiasedReport ub = check_unbiased(model, est);
    table.push_back({"unbiased_residual", ub.max_residual});
    if (ub.max_residual > 1e-8) {
      err << "estimator is not locally unbiased (residual " << num(ub.max_residual) << ")\n";
      ok = false;
    }
    const RealMatrix v = mse_matrix(model, est);
    for (int j = 0; j < est.num_params(); ++j) {
      const std::string label = j < static_cast<int>(est.labels.size()) ? est.labels[j] : std::to_string(j);
      table.push_back({"v_" + label, v(j, j)});
    }
    table.push_back({"mse_trace", v.trace()});
    if (bound != "none") {
      const BoundRow r = compute_bound(bound, model, opts);
      if (!r.message.empty()) err << r.bound << ": " << r.message << "\n";
      ok = ok && r.ok;
      table.push_back({"bound", bound});
      table.push_back({"bound_value", json_num(r.value)});
      table.push_back({"bound_gap", json_num(r.gap)});
      table.push_back({"deficit", json_num(v.trace() - r.value)});
    }
  }
  table.push_back({"ok", ok});
  Sink sink(ss.output, out);
  write_table(sink.stream(), ss.format, {"field", "value"}, table);
  return ok ? kExitOk : kExitFailure;
}

int cmd_solve_sdp(const std::string& path, const SolveSpec& ss, std::ostream& out) {
  check_solve_spec(ss);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const SdpProblem problem = read_sdpa(text.str());
  SolverOptions so;
  so.tol = ss.tol;
  so.max_iter = ss.max_iter;
  const SdpSolution sol = solve(problem, so);
  const CertificateReport cert = check_certificate(problem, sol, std::max(ss.tol, 1e-7));
  const bool ok = sol.status == SolveStatus::optimal && sol.gap <= ss.tol && cert.passed();
  std::vector<std::vector<json>> table = {
      {"status", std::string(to_string(sol.status))},
      {"primal_obj", sol.primal_obj},
      {"dual_obj", sol.dual_obj},
      {"gap", sol.gap},
      {"primal_infeas", sol.primal_infeas},
      {"dual_infeas", sol.dual_infeas},
      {"iterations", sol.iterations},
      {"constraints", problem.num_constraints()},
      {"dropped", problem.dropped()},
      {"certificate", cert.summary()},
      {"ok", ok},
  };
  Sink sink(ss.output, out);
  write_table(sink.stream(), ss.format, {"field", "value"}, table);
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum multi-parameter estimation bounds", "qmb"};
  app.require_subcommand(1);

  ModelSpec ms;
  SolveSpec ss;
  std::string dump_prefix;
  std::vector<std::string> grid;
  int steps = 50;
  double eps_min = 0.0;
  double eps_max = 0.98;
  PovmSpec ps;
  std::string sdpa_path;

  auto* bounds = app.add_subcommand("bounds", "compute SLD, Holevo and Nagaoka-Hayashi bounds");
  add_model_options(bounds, ms);
  add_solve_options(bounds, ss, true);
  bounds->add_option("--dump-sdp", dump_prefix, "write PREFIX_nh.dat-s and PREFIX_holevo.dat-s");

  auto* sweep = app.add_subcommand("sweep", "bounds over a parameter grid");
  add_model_options(sweep, ms);
  add_solve_options(sweep, ss, true);
  sweep->add_option("--grid", grid, "NAME=START:STOP:STEPS, NAME in eps, eta, a1sq, phi")->required();

  auto* fig1 = app.add_subcommand("fig1", "average preciseness for 1, 2 and 3 phase-damping parameters");
  add_solve_options(fig1, ss, false);
  fig1->add_option("--steps", steps, "grid points");
  fig1->add_option("--eps-min", eps_min, "first epsilon");
  fig1->add_option("--eps-max", eps_max, "last epsilon");

  auto* verify = app.add_subcommand("verify-povm", "check a measurement against a bound");
  add_model_options(verify, ms);
  add_solve_options(verify, ss, false);
  verify->add_option("--povm", ps.builtin, "builtin: appendix-c (damped probe, five or seven outcomes) or appendix-d (one-photon interferometer)");
  verify->add_option("--povm-file", ps.file, "estimator JSON file (uses --model/--model-file)");
  verify->add_option("--a", ps.a, "five-outcome parameter a, a^2 + b^2 <= 1");
  verify->add_option("--b", ps.b, "five-outcome parameter b");
  verify->add_flag("--split", ps.split, "split the last outcome to estimate (x, y, z)");
  verify->add_option("--delta", ps.delta, "split form with a = b = sqrt(delta)");
  verify->add_flag("--boundary", ps.boundary, "interferometer at the boundary eta = (a0^2 - a1^2)/(2 a0^2)");
  verify->add_flag("--projective", ps.projective, "interferometer three-outcome projective form at any eta");
  verify->add_option("--bound", ps.bound, "nh, holevo or none");

  auto* solve_cmd = app.add_subcommand("solve-sdp", "solve an SDPA sparse file");
  add_solve_options(solve_cmd, ss, false);
  solve_cmd->add_option("file", sdpa_path, "SDPA .dat-s file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*bounds) return cmd_bounds(ms, ss, dump_prefix, out, err);
    if (*sweep) return cmd_sweep(ms, ss, grid, out, err);
    if (*fig1) return cmd_fig1(ss, steps, eps_min, eps_max, out, err);
    if (*verify) return cmd_verify_povm(ms, ss, ps, out, err);
    if (*solve_cmd) return cmd_solve_sdp(sdpa_path, ss, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace qmb
