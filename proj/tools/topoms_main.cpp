// Command-line front end: runs either segmentation method on a PGM
// image, or the built-in validation suite on synthetic images.
//
// Exit codes: 0 success, 1 failed validation checks or I/O trouble,
// 2 configuration/usage errors, 3 solver failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "topoms/at.hpp"
#include "topoms/cover.hpp"
#include "topoms/csv.hpp"
#include "topoms/energy.hpp"
#include "topoms/errors.hpp"
#include "topoms/grid.hpp"
#include "topoms/oracle.hpp"
#include "topoms/synthetic.hpp"
#include "topoms/topo.hpp"

namespace fs = std::filesystem;
using namespace topoms;

namespace {

void check_thread_env() {
  const char* env = std::getenv("TOPOMS_THREADS");
  if (!env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    throw config_error("TOPOMS_THREADS must be a positive integer, got '" +
                       std::string(env) + "'");
  }
  // computation is deterministic and currently single-threaded; any
  // positive cap is honored
}

struct CommonOpts {
  std::string input;
  std::string out_dir = "out";
};

void write_config_echo(const fs::path& dir,
                       const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
  write_text_file(dir / "config.txt", text);
}

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory '" + out_dir + "'");
  return dir;
}

int run_topo(const CommonOpts& opts, TopoConfig cfg) {
  const ImageGrid grid = load_pgm(opts.input);
  cfg.validate_for(grid);
  const fs::path dir = prepare_out_dir(opts.out_dir);
  write_config_echo(dir, {{"subcommand", "topo"},
                          {"input", opts.input},
                          {"alpha", fmt_double(cfg.alpha)},
                          {"beta", fmt_double(cfg.beta)},
                          {"epsilon", fmt_double(cfg.epsilon)},
                          {"kappa", fmt_double(cfg.kappa)},
                          {"batch_size", std::to_string(cfg.batch_size)},
                          {"separation", fmt_double(cfg.separation)},
                          {"max_iters", std::to_string(cfg.max_iters)},
                          {"cg_tol", fmt_double(cfg.cg_tol)}});

  const SegmentationResult result = run(grid, cfg);

  save_pgm(result.u, dir / "u.pgm", SaveMode::clamp);
  save_pgm(result.v, dir / "v.pgm", SaveMode::clamp);
  save_cover_csv(result.cover, dir / "edges.csv");
  save_trace_csv(result.trace, dir / "trace.csv");

  std::printf("topo: %zu balls in %zu iterations, stopped by %s\n",
              result.cover.ball_count(), result.trace.iterations.size(),
              to_string(result.stopped_by));
  std::printf("edge length estimate: %s\n",
              fmt_double(result.cover.length_estimate()).c_str());
  if (!result.trace.iterations.empty()) {
    const auto& e = result.trace.iterations.back().energy;
    std::printf("final energy: total=%s fidelity=%s dirichlet=%s length=%s\n",
                fmt_double(e.total).c_str(), fmt_double(e.fidelity).c_str(),
                fmt_double(e.dirichlet).c_str(), fmt_double(e.length).c_str());
  }
  std::printf("artifacts written to %s\n", dir.string().c_str());
  return 0;
}

int run_at_cmd(const CommonOpts& opts, ATConfig cfg) {
  const ImageGrid grid = load_pgm(opts.input);
  cfg.validate();
  const fs::path dir = prepare_out_dir(opts.out_dir);
  write_config_echo(dir, {{"subcommand", "at"},
                          {"input", opts.input},
                          {"alpha", fmt_double(cfg.alpha)},
                          {"beta", fmt_double(cfg.beta)},
                          {"eps_at", fmt_double(cfg.eps_at)},
                          {"threshold", fmt_double(cfg.threshold)},
                          {"outer_iters", std::to_string(cfg.outer_iters)},
                          {"cg_tol", fmt_double(cfg.cg_tol)}});

  const ATResult result = run_at(grid, cfg);
  save_pgm(result.u, dir / "u.pgm", SaveMode::clamp);
  save_pgm(result.v, dir / "v.pgm", SaveMode::clamp);

  CellField edges = threshold_edges(result.v, grid, cfg.threshold);
  CellField edge_image(grid);
  for (std::size_t k = 0; k < edges.values.size(); ++k) {
    edge_image.values[k] = edges.values[k] > 0.5 ? 0.0 : 1.0;  // edges black
  }
  save_pgm(edge_image, dir / "edges.pgm", SaveMode::clamp);

  std::string trace_csv = "iter,fidelity,dirichlet,length,total\n";
  for (const auto& rec : result.trace.iterations) {
    trace_csv += energy_csv_row(rec.iter, rec.energy) + "\n";
  }
  write_text_file(dir / "trace.csv", trace_csv);

  const auto& e = result.trace.iterations.back().energy;
  std::printf("at: %d sweeps, final energy total=%s\n", cfg.outer_iters,
              fmt_double(e.total).c_str());
  std::printf("artifacts written to %s\n", dir.string().c_str());
  return 0;
}

struct CheckList {
  int failures = 0;
  void report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    if (!ok) ++failures;
  }
};

int run_validate(const std::string& out_dir, bool fast) {
  const fs::path dir = prepare_out_dir(out_dir);
  write_config_echo(dir, {{"subcommand", "validate"},
                          {"mode", fast ? "fast" : "full"}});
  CheckList checks;

  // 1. solver accuracy against the closed-form solution
  {
    const std::vector<int> levels = fast ? std::vector<int>{16, 32, 64}
                                         : std::vector<int>{32, 64, 128};
    const auto rows = manufactured_convergence(levels, 1.0);
    save_convergence_csv(rows, dir / "convergence.csv");
    bool ok = true;
    std::string detail = "error ratios";
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const double ratio = rows[k - 1].l2_error / rows[k].l2_error;
      detail += " " + fmt_double(ratio);
      ok = ok && ratio >= 3.5 && ratio <= 4.5;
    }
    checks.report(ok, "solver_convergence", detail + " (want within [3.5,4.5])");
  }

  // 2. leading-order insertion prediction vs exact re-solves
  {
    const int n = fast ? 128 : 512;
    const std::vector<double> sweep =
        fast ? std::vector<double>{0.16, 0.08} : std::vector<double>{0.08, 0.04, 0.02};
    const ImageGrid bump = make_gaussian_bump(n, 0.3, 0.3, 0.15, 0.1, 0.8);
    TopoConfig cfg;
    cfg.alpha = 0.05;
    cfg.kappa = 0.01;
    const ExpansionProbe probe = expansion_probe(bump, {0.5, 0.5}, sweep, cfg);
    save_probe_csv(probe, dir / "expansion_probe.csv");

    bool decreasing = !probe.degenerate;
    for (std::size_t k = 1; k < probe.rel_errors.size(); ++k) {
      decreasing = decreasing && probe.rel_errors[k] < probe.rel_errors[k - 1];
    }
    std::string rels = "rel errors";
    for (double r : probe.rel_errors) rels += " " + fmt_double(r);
    checks.report(decreasing && probe.rel_errors.back() < 0.5,
                  "expansion_error_decay", rels);

    bool negative = true;
    bool in_band = true;
    const double target = std::numbers::pi * cfg.alpha *
                          ((1.0 - cfg.kappa) / (1.0 + cfg.kappa)) *
                          probe.gsq_at_center;
    for (std::size_t k = 0; k < probe.exact.size(); ++k) {
      negative = negative && probe.exact[k] < 0.0;
      const double scaled =
          std::abs(probe.exact[k]) / (probe.epsilons[k] * probe.epsilons[k]);
      in_band = in_band && scaled >= 0.5 * target && scaled <= 2.0 * target;
    }
    checks.report(negative, "insertion_gain_sign", "exact energy drops are negative");
    checks.report(in_band, "insertion_gain_order",
                  "|exact|/eps^2 within a factor 2 of the prediction");
  }

  // 3. greedy driver descends on a step image
  {
    const ImageGrid step = make_step(fast ? 64 : 128);
    TopoConfig cfg;
    cfg.alpha = 0.04;
    cfg.beta = 0.005;
    cfg.epsilon = 0.05;
    cfg.kappa = 0.01;
    cfg.batch_size = 1;
    cfg.separation = 0.05;
    const SegmentationResult res = run(step, cfg);
    save_trace_csv(res.trace, dir / "step_trace.csv");
    checks.report(res.cover.ball_count() > 0 && descent_audit(res.trace),
                  "greedy_descent",
                  std::to_string(res.cover.ball_count()) +
                      " balls inserted, energy strictly decreasing");
  }

  // 4. stop condition on a constant image
  {
    const ImageGrid flat = make_constant(64, 0.37);
    TopoConfig cfg;
    const SegmentationResult res = run(flat, cfg);
    double max_dev = 0.0;
    for (double v : res.u.values) max_dev = std::max(max_dev, std::abs(v - 0.37));
    checks.report(res.cover.ball_count() == 0 && max_dev < 1e-7,
                  "constant_image_stop",
                  "no balls, |u - f| <= " + fmt_double(max_dev));
  }

  std::printf("%s\n", checks.failures == 0 ? "all checks passed"
                                           : "some checks FAILED");
  return checks.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-preserving image segmentation by greedy insertion of "
               "small low-conductivity balls, with a phase-field baseline"};
  app.require_subcommand(1);

  CommonOpts topo_opts, at_opts;
  TopoConfig topo_cfg;
  ATConfig at_cfg;
  bool kappa_given = false;
  std::string validate_out = "out";
  bool validate_fast = false;

  CLI::App* topo_cmd =
      app.add_subcommand("topo", "greedy ball-insertion segmentation");
  topo_cmd->add_option("input", topo_opts.input, "input PGM image")->required();
  topo_cmd->add_option("--alpha", topo_cfg.alpha, "smoothness weight");
  topo_cmd->add_option("--beta", topo_cfg.beta, "edge length weight");
  topo_cmd->add_option("--epsilon", topo_cfg.epsilon, "ball radius (domain units)");
  topo_cmd->add_option("--kappa", topo_cfg.kappa, "contrast inside balls")
      ->each([&kappa_given](const std::string&) { kappa_given = true; });
  topo_cmd->add_option("--batch-size", topo_cfg.batch_size, "balls per iteration");
  auto* sep_opt = topo_cmd->add_option(
      "--separation", topo_cfg.separation,
      "min distance between same-batch centers (default: epsilon)");
  topo_cmd->add_option("--max-iters", topo_cfg.max_iters, "iteration cap");
  topo_cmd->add_option("--cg-tol", topo_cfg.cg_tol, "relative solver tolerance");
  topo_cmd->add_option("--out", topo_opts.out_dir, "output directory");

  CLI::App* at_cmd = app.add_subcommand("at", "phase-field baseline");
  at_cmd->add_option("input", at_opts.input, "input PGM image")->required();
  at_cmd->add_option("--alpha", at_cfg.alpha, "smoothness weight");
  at_cmd->add_option("--beta", at_cfg.beta, "edge length weight");
  at_cmd->add_option("--eps-at", at_cfg.eps_at, "phase-field width");
  at_cmd->add_option("--threshold", at_cfg.threshold, "edge threshold on v");
  at_cmd->add_option("--max-iters", at_cfg.outer_iters, "outer sweeps");
  at_cmd->add_option("--cg-tol", at_cfg.cg_tol, "relative solver tolerance");
  at_cmd->add_option("--out", at_opts.out_dir, "output directory");

  CLI::App* val_cmd =
      app.add_subcommand("validate", "run the built-in validation suite");
  val_cmd->add_option("--out", validate_out, "output directory");
  val_cmd->add_flag("--fast", validate_fast, "smaller grids (smoke test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    std::fprintf(stderr, "run with --help for usage\n");
    return 2;
  }

  try {
    check_thread_env();
    if (topo_cmd->parsed()) {
      if (!kappa_given) topo_cfg.kappa = std::min(0.01, topo_cfg.epsilon);
      if (sep_opt->count() == 0) topo_cfg.separation = topo_cfg.epsilon;
      return run_topo(topo_opts, topo_cfg);
    }
    if (at_cmd->parsed()) return run_at_cmd(at_opts, at_cfg);
    return run_validate(validate_out, validate_fast);
  } catch (const config_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const format_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const solver_error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
