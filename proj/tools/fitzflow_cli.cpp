// Experiment front end: parses a structured-text config, dispatches to the
// library, and writes deterministic CSV/plot artifacts plus a run manifest.
//
// Exit codes: 0 success, 2 config error, 3 numerical non-convergence,
// 4 I/O error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fitzflow/csv.hpp"
#include "fitzflow/descriptors.hpp"
#include "fitzflow/flow.hpp"
#include "fitzflow/gamma.hpp"

namespace ff = fitzflow;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
  ff::Config cfg;
  std::uint64_t hash;
  std::string out_dir;
  unsigned seed;
  bool quiet;
  json timings = json::object();
  std::vector<std::string> files;

  void note(const std::string& msg) const {
    if (!quiet) std::cout << msg << "\n";
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }

  void emit(const std::string& name, const ff::CsvWriter& csv) {
    csv.write(path(name), hash, seed);
    files.push_back(name);
  }

  template <class F>
  auto timed(const std::string& label, F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    auto result = f();
    auto t1 = std::chrono::steady_clock::now();
    timings[label] =
        std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() /
        1000.0;
    return result;
  }

  void write_manifest() {
    json m;
    m["config_hash"] = hash;
    m["seed"] = seed;
    m["library_version"] = kVersion;
    m["timings_ms"] = timings;
    m["outputs"] = files;
    ff::write_text_atomic(path("manifest.json"), m.dump(2) + "\n");
  }
};

std::vector<double> lattice(double lo, double hi, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = lo + i * (hi - lo) / (n - 1);
  return xs;
}

// ---------------------------------------------------------------------------
// conjugate
// ---------------------------------------------------------------------------

int cmd_conjugate(RunContext& ctx) {
  const auto& c = ctx.cfg;
  ff::ConvexFn f = ff::make_convex(c.require("conjugate", "function"));
  if (f.dim() != 1)
    throw ff::ConfigError("conjugate.function", "expected a 1D potential");
  double lo = c.get_num("conjugate", "lo", -2.0);
  double hi = c.get_num("conjugate", "hi", 2.0);
  int n = (int)c.get_int("conjugate", "samples", 101);
  if (!(hi > lo) || n < 3)
    throw ff::ConfigError("conjugate.samples", "need hi > lo and samples >= 3");

  ff::ConvexFn fs = ctx.timed("conjugate", [&] { return f.conjugate(); });

  ff::CsvWriter in_csv({"x", "f"});
  ff::CsvWriter out_csv({"y", "fstar"});
  std::vector<ff::Vec> probes;
  for (double x : lattice(lo, hi, n)) {
    ff::Vec v = ff::Vec::Constant(1, x);
    in_csv.add_row({x, f.eval(v).value()});
    out_csv.add_row({x, fs.eval(v).value()});
    if (f.eval(v).is_finite()) probes.push_back(v);
  }
  ff::ExtReal dev = ff::biconjugate_check(f, probes);
  ff::CsvWriter sum({"metric", "value"});
  sum.add_row_raw({"biconjugate_deviation", ff::format_num(dev.value())});
  ctx.emit("input.csv", in_csv);
  ctx.emit("conjugate.csv", out_csv);
  ctx.emit("summary.csv", sum);
  ctx.note("conjugate: biconjugate deviation " + ff::format_num(dev.value()));
  return 0;
}

// ---------------------------------------------------------------------------
// fitz
// ---------------------------------------------------------------------------

int cmd_fitz(RunContext& ctx) {
  const auto& c = ctx.cfg;
  ff::MonotoneOp op = ff::make_operator(c.require("fitz", "operator"));
  ff::RepFn g = ff::make_rep(c.require("fitz", "representative"));
  if (g.dim() != op.dim())
    throw ff::ConfigError("fitz.representative", "dimension mismatch");
  double r = c.get_num("fitz", "radius", 1.5);
  int density = (int)c.get_int("fitz", "density", 41);
  ff::Box box = ff::Box::symmetric(r, op.dim());

  auto report = ctx.timed("represents_check",
                          [&] { return ff::represents_check(g, op, box, density); });
  ff::CsvWriter csv({"metric", "value"});
  csv.add_row_raw({"min_margin", ff::format_num(report.min_margin)});
  csv.add_row_raw({"equality_fraction", ff::format_num(report.equality_fraction)});
  csv.add_row_raw({"worst_graph_gap", ff::format_num(report.worst_graph_gap)});
  csv.add_row_raw({"spurious_points", std::to_string(report.spurious.size())});
  csv.add_row_raw({"domination_ok", report.domination_ok ? "1" : "0"});
  csv.add_row_raw({"equality_ok", report.equality_ok ? "1" : "0"});
  csv.add_row_raw({"represents", report.ok() ? "1" : "0"});
  ctx.emit("representation.csv", csv);
  ctx.note("fitz: represents=" + std::string(report.ok() ? "yes" : "no") +
           " min_margin=" + ff::format_num(report.min_margin));
  return 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

ff::Vec parse_vec(const ff::Config& c, const std::string& sec,
                  const std::string& key, int fallback_dim) {
  if (!c.has(sec, key)) return ff::Vec::Zero(fallback_dim);
  std::vector<double> xs = c.get_num_list(sec, key);
  ff::Vec v(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) v[i] = xs[i];
  return v;
}

int cmd_solve(RunContext& ctx) {
  const auto& c = ctx.cfg;
  std::string kind = c.get("solve", "kind", "mm");
  ff::MonotoneOp op = ff::make_operator(c.require("solve", "operator"));
  ff::RepFn rep = ff::make_rep(c.require("solve", "representative"));
  double T = c.get_num("solve", "T", 1.0);
  int N = (int)c.get_int("solve", "N", 64);
  ff::TimeGrid grid(T, N);
  ff::Vec init = parse_vec(c, "solve", "init", op.dim());
  if ((int)init.size() != op.dim())
    throw ff::ConfigError("solve.init", "dimension mismatch");
  ff::Vec src = parse_vec(c, "solve", "source", op.dim());
  ff::Trajectory h = ff::Trajectory::constant(grid, src);

  ff::FlowProblem prob = [&] {
    if (kind == "mm") return ff::FlowProblem::mm(op, h, init);
    ff::ConvexFn gamma = ff::make_convex(c.require("solve", "gamma"));
    if (kind == "dne1") return ff::FlowProblem::dne1(op, gamma, h, init);
    if (kind == "dne2") return ff::FlowProblem::dne2(op, gamma, h, init);
    throw ff::ConfigError("solve.kind", "expected mm, dne1, or dne2");
  }();

  ff::OptimizerConfig ocfg;
  ocfg.tol_abs = c.get_num("solve", "tol_abs", ocfg.tol_abs);
  ocfg.max_iters = (int)c.get_int("solve", "max_iters", ocfg.max_iters);

  ff::FlowSolution ref =
      ctx.timed("solve_reference", [&] { return ff::solve_reference(prob); });
  ff::NullMinResult nm = ctx.timed(
      "solve_null_min", [&] { return ff::solve_null_min(prob, rep, ocfg); });

  auto traj_csv = [&](const ff::Trajectory& u) {
    std::vector<std::string> cols = {"t"};
    for (int i = 0; i < u.dim(); ++i) cols.push_back("u" + std::to_string(i));
    ff::CsvWriter csv(cols);
    for (int k = 0; k <= grid.N; ++k) {
      std::vector<double> row = {grid.node(k)};
      for (int i = 0; i < u.dim(); ++i) row.push_back(u.values[k][i]);
      csv.add_row(row);
    }
    return csv;
  };
  ctx.emit("reference.csv", traj_csv(ref.u));
  ctx.emit("nullmin.csv", traj_csv(nm.u));

  ff::BenValue gaps = [&] {
    switch (prob.kind) {
      case ff::FlowKind::MM:
        return ff::ben_functional(prob, rep, nm.u, h);
      case ff::FlowKind::DNE1:
        return ff::dne1_functional(prob, rep, nm.u, *nm.aux, h);
      default:
        return ff::dne2_functional(prob, rep, nm.u, *nm.aux, h);
    }
  }();
  ff::CsvWriter gap_csv({"interval", "weighted_gap"});
  for (size_t k = 0; k < gaps.per_interval.size(); ++k)
    gap_csv.add_row({(double)k, gaps.per_interval[k]});
  ctx.emit("gaps.csv", gap_csv);

  double dist = ff::Trajectory::rel_l2_distance(nm.u, ref.u);
  ff::CsvWriter sum({"metric", "value"});
  sum.add_row_raw({"rel_l2_distance", ff::format_num(dist)});
  sum.add_row_raw({"nullmin_value", ff::format_num(nm.value)});
  sum.add_row_raw({"iterations", std::to_string(nm.iters)});
  sum.add_row_raw({"converged", nm.converged ? "1" : "0"});
  ctx.emit("summary.csv", sum);
  ctx.note("solve: value=" + ff::format_num(nm.value) +
           " rel_l2=" + ff::format_num(dist) +
           (nm.converged ? "" : " (stagnated)"));
  return nm.converged ? 0 : 3;
}

// ---------------------------------------------------------------------------
// gamma
// ---------------------------------------------------------------------------

int cmd_gamma(RunContext& ctx) {
  const auto& c = ctx.cfg;
  std::string family = c.require("gamma", "family");
  int n_max = (int)c.get_int("gamma", "n_max", 64);
  double tol = c.get_num("gamma", "tol", 1e-2);
  std::vector<int> ns;
  for (int n = 1; n <= n_max; ++n) ns.push_back(n);

  ff::GammaVerdict v;
  std::optional<ff::KuratowskiReport> kur;
  if (family == "fb_perturbed") {
    // f_{b_n}, b_n = 1/2 + 1/n, claimed limit Fb(1/2)
    auto seq = ff::FnSequence::of_rep(
        [](int n) { return ff::RepFn::fb(0.5 + 1.0 / n); }, ff::RepFn::fb(0.5));
    v = ctx.timed("gamma_check", [&] {
      return ff::gamma_check_static(seq, ff::Box::symmetric(1.0, 2), ns, tol,
                                    ctx.seed);
    });
    kur = ctx.timed("kuratowski", [&] {
      return ff::kuratowski_graph_check(
          [](int n) { return ff::RepFn::fb(0.5 + 1.0 / n); },
          ff::MonotoneOp::identity(1), ff::Box::symmetric(1.0, 1), ns);
    });
  } else if (family == "quadratic_perturbed") {
    auto seq = ff::FnSequence::of_convex(
        [](int n) { return ff::ConvexFn::quadratic(0.5 * (1.0 + 1.0 / n)); },
        ff::ConvexFn::half_norm_sq(1));
    v = ctx.timed("gamma_check", [&] {
      return ff::gamma_check_static(seq, ff::Box::symmetric(1.0, 1), ns, tol,
                                    ctx.seed);
    });
  } else if (family == "oscillatory") {
    ff::IntegrandSequence seq;
    seq.dim = 1;
    seq.phi = [](int n, double t, const ff::Vec& w) {
      return (1.0 + std::sin(2 * std::numbers::pi * n * t) / n) *
             w.squaredNorm();
    };
    seq.limit = [](double, const ff::Vec& w) { return w.squaredNorm(); };
    seq.time_independent = false;
    v = ctx.timed("gamma_check", [&] {
      return ff::evolutionary_gamma_check(seq, ff::TimeGrid(1.0, 64),
                                          ff::Box::symmetric(1.0, 1), ns, tol,
                                          ctx.seed);
    });
  } else {
    throw ff::ConfigError("gamma.family", "unknown family '" + family + "'");
  }

  ff::CsvWriter csv({"metric", "value"});
  csv.add_row_raw({"liminf_ok", v.liminf_ok ? "1" : "0"});
  csv.add_row_raw({"liminf_worst_deficit", ff::format_num(v.worst_liminf.deficit)});
  csv.add_row_raw({"recovery_ok", v.recovery_ok ? "1" : "0"});
  csv.add_row_raw(
      {"recovery_worst_deficit", ff::format_num(v.worst_recovery.deficit)});
  csv.add_row_raw({"pairing_continuity_trivial",
                   v.pairing_continuity_trivial ? "1" : "0"});
  csv.add_row_raw({"translation_ok", v.translation_ok ? "1" : "0"});
  if (kur) {
    csv.add_row_raw({"kuratowski_graphs_converge",
                     kur->graphs_converge ? "1" : "0"});
    csv.add_row_raw({"kuratowski_worst_distance",
                     ff::format_num(kur->worst_graph_distance)});
    csv.add_row_raw({"kuratowski_upper_limit_contained",
                     kur->upper_limit_contained ? "1" : "0"});
  }
  ctx.emit("verdict.csv", csv);
  ctx.note("gamma: liminf=" + std::string(v.liminf_ok ? "ok" : "FAIL") +
           " recovery=" + std::string(v.recovery_ok ? "ok" : "FAIL"));
  return 0;
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

int cmd_stability(RunContext& ctx) {
  const auto& c = ctx.cfg;
  std::string kind = c.get("stability", "kind", "mm");
  double T = c.get_num("stability", "T", 1.0);
  int N = (int)c.get_int("stability", "N", 64);
  ff::TimeGrid grid(T, N);
  ff::Vec init = parse_vec(c, "stability", "init", 1);
  std::vector<int> ns = c.has("stability", "n_list")
                            ? c.get_int_list("stability", "n_list")
                            : std::vector<int>{2, 4, 8, 16, 32, 64, 128, 256};
  ff::Trajectory h = ff::Trajectory::constant(grid, ff::Vec::Zero(1));

  // perturbed family α_n = (1+1/n)·identity in the requested flow kind
  auto lam = [](int n) { return n == 0 ? 1.0 : 1.0 + 1.0 / n; };
  ff::FlowFamily fam = [&]() -> ff::FlowFamily {
    if (kind == "mm")
      return {[=](int n) {
                return ff::FlowProblem::mm(ff::MonotoneOp::linear_scalar(lam(n)),
                                           h, init);
              },
              [=](int n) {
                return ff::RepFn::fenchel_of(ff::ConvexFn::quadratic(0.5 * lam(n)));
              },
              ff::FlowProblem::mm(ff::MonotoneOp::identity(1), h, init),
              ff::RepFn::fitz_identity(1)};
    if (kind == "dne1")
      return {[=](int n) {
                return ff::FlowProblem::dne1(
                    ff::MonotoneOp::identity(1),
                    ff::ConvexFn::quadratic(0.5 * lam(n)), h, init);
              },
              [=](int) { return ff::RepFn::fitz_identity(1); },
              ff::FlowProblem::dne1(ff::MonotoneOp::identity(1),
                                    ff::ConvexFn::half_norm_sq(1), h, init),
              ff::RepFn::fitz_identity(1)};
    if (kind == "dne2")
      return {[=](int n) {
                return ff::FlowProblem::dne2(
                    ff::MonotoneOp::identity(1),
                    ff::ConvexFn::quadratic(0.5 * lam(n)), h, init);
              },
              [=](int) { return ff::RepFn::fitz_identity(1); },
              ff::FlowProblem::dne2(ff::MonotoneOp::identity(1),
                                    ff::ConvexFn::half_norm_sq(1), h, init),
              ff::RepFn::fitz_identity(1)};
    throw ff::ConfigError("stability.kind", "expected mm, dne1, or dne2");
  }();

  ff::StabilityReport rep = ctx.timed("stability", [&] {
    return kind == "mm" ? ff::stability_experiment(fam, ns)
                        : ff::dne_stability_experiment(fam, ns);
  });

  ff::CsvWriter csv({"n", "distance", "nullmin_value"});
  std::vector<std::pair<double, double>> plot;
  for (size_t i = 0; i < ns.size(); ++i) {
    csv.add_row({(double)ns[i], rep.distances[i], rep.null_values[i]});
    plot.push_back({(double)ns[i], rep.distances[i]});
  }
  ctx.emit("report.csv", csv);
  ff::write_plot_data(ctx.path("distances.dat"), plot, ctx.hash, ctx.seed);
  ctx.files.push_back("distances.dat");

  ff::CsvWriter sum({"metric", "value"});
  sum.add_row_raw({"fitted_rate", ff::format_num(rep.fitted_rate)});
  sum.add_row_raw({"fit_residual", ff::format_num(rep.fit_residual)});
  sum.add_row_raw(
      {"limit_functional_value", ff::format_num(rep.limit_functional_value)});
  ctx.emit("summary.csv", sum);
  ctx.note("stability: rate=" + ff::format_num(rep.fitted_rate) +
           " limit_value=" + ff::format_num(rep.limit_functional_value));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fitzpatrick-calculus experiment harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned seed = 0;
  bool quiet = false;
  const char* env_out = std::getenv("FITZFLOW_OUT_DIR");

  for (const char* name :
       {"conjugate", "fitz", "solve", "gamma", "stability"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed (recorded in headers)");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  }

  CLI11_PARSE(app, argc, argv);
  std::string cmd = app.get_subcommands().front()->get_name();

  try {
    RunContext ctx{ff::Config::parse_file(config_path), 0, "", 0, quiet};
    ctx.hash = ctx.cfg.hash();
    ctx.seed = seed ? seed : (unsigned)ctx.cfg.get_int("run", "seed", 2024);
    ctx.out_dir = !out_dir.empty() ? out_dir
                  : env_out        ? std::string(env_out)
                                   : ctx.cfg.get("run", "out", "out");

    int rc = 0;
    if (cmd == "conjugate") rc = cmd_conjugate(ctx);
    else if (cmd == "fitz") rc = cmd_fitz(ctx);
    else if (cmd == "solve") rc = cmd_solve(ctx);
    else if (cmd == "gamma") rc = cmd_gamma(ctx);
    else rc = cmd_stability(ctx);
    ctx.write_manifest();
    return rc;
  } catch (const ff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ff::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
