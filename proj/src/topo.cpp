#include "topoms/topo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "topoms/csv.hpp"
#include "topoms/errors.hpp"

namespace topoms {

void TopoConfig::validate() const {
  if (!(alpha > 0.0)) throw config_error("alpha must be positive");
  if (!(beta > 0.0)) throw config_error("beta must be positive");
  if (!(epsilon > 0.0)) throw config_error("epsilon must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw config_error("kappa must lie in (0,1)");
  if (!(alpha * kappa < 1.0)) {
    throw config_error("alpha*kappa = " + fmt_double(alpha * kappa) +
                       " must be < 1");
  }
  if (!(kappa <= epsilon)) {
    throw config_error("kappa = " + fmt_double(kappa) +
                       " must not exceed epsilon = " + fmt_double(epsilon));
  }
  if (batch_size < 1) throw config_error("batch_size must be >= 1");
  if (!(separation >= 0.0)) throw config_error("separation must be >= 0");
  if (max_iters < 1) throw config_error("max_iters must be >= 1");
  if (!(cg_tol > 0.0)) throw config_error("cg_tol must be positive");
}

void TopoConfig::validate_for(const ImageGrid& grid) const {
  validate();
  if (!(epsilon >= 2.0 * grid.h())) {
    throw config_error("epsilon = " + fmt_double(epsilon) +
                       " must be at least 2h = " + fmt_double(2.0 * grid.h()) +
                       " for this grid");
  }
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::threshold: return "threshold";
    case StopReason::max_iters: return "max_iters";
    case StopReason::no_candidates: return "no_candidates";
  }
  return "unknown";
}

double predicted_delta_G(double gsq_value, const TopoConfig& cfg) {
  return -cfg.epsilon * cfg.epsilon * std::numbers::pi * cfg.alpha *
         ((1.0 - cfg.kappa) / (1.0 + cfg.kappa)) * gsq_value;
}

bool accept_test(double gsq_value, const TopoConfig& cfg) {
  return 0.5 * cfg.alpha * std::numbers::pi *
             ((1.0 - cfg.kappa) / (1.0 + cfg.kappa)) * gsq_value >=
         cfg.beta / cfg.epsilon;
}

namespace {

struct Candidate {
  std::array<double, 2> center;
  double gsq;
  std::size_t cell;
};

// Greedy scan shared by select_batch and run; the scan stops at the
// first candidate failing accept_test since the order is by falling gsq.
std::vector<Candidate> select_batch_detail(const CellField& gsq,
                                           const BallCover& cover,
                                           const ImageGrid& grid,
                                           const TopoConfig& cfg) {
  const std::size_t n = gsq.values.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&gsq](std::uint32_t a, std::uint32_t b) {
                     if (gsq.values[a] != gsq.values[b]) {
                       return gsq.values[a] > gsq.values[b];
                     }
                     return a < b;
                   });

  std::vector<Candidate> picked;
  const double sep2 = cfg.separation * cfg.separation;
  for (std::uint32_t cell : order) {
    if (picked.size() >= std::size_t(cfg.batch_size)) break;
    const double g = gsq.values[cell];
    if (!accept_test(g, cfg)) break;
    const int ci = int(cell % std::size_t(grid.nx()));
    const int cj = int(cell / std::size_t(grid.nx()));
    const double x = grid.cell_cx(ci);
    const double y = grid.cell_cy(cj);
    if (cover.contains(x, y)) continue;
    bool too_close = false;
    for (const auto& p : picked) {
      const double dx = x - p.center[0];
      const double dy = y - p.center[1];
      if (dx * dx + dy * dy <= sep2) {
        too_close = true;
        break;
      }
    }
    if (too_close) continue;
    picked.push_back({{x, y}, g, cell});
  }
  return picked;
}

bool all_cells_covered(const BallCover& cover, const ImageGrid& grid) {
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (!cover.contains(grid.cell_cx(i), grid.cell_cy(j))) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::array<double, 2>> select_batch(const CellField& gsq,
                                                const BallCover& cover,
                                                const ImageGrid& grid,
                                                const TopoConfig& cfg) {
  if (!gsq.matches(grid)) {
    throw std::invalid_argument("gsq dimensions do not match grid");
  }
  std::vector<std::array<double, 2>> centers;
  for (const auto& c : select_batch_detail(gsq, cover, grid, cfg)) {
    centers.push_back(c.center);
  }
  return centers;
}

SegmentationResult run(const ImageGrid& grid, const TopoConfig& cfg) {
  cfg.validate_for(grid);

  BallCover cover(cfg.epsilon, cfg.kappa, grid.width(), grid.height());
  RunTrace trace;
  trace.cg_tol = cfg.cg_tol;
  trace.batch_size = cfg.batch_size;

  const int max_iter = default_max_iter(grid.node_count());
  NodalField u(grid);

  auto solve_for_cover = [&](const CellField& v,
                             const std::vector<double>* warm) -> SolverReport {
    SparseSystem sys = assemble(grid, v, cfg.alpha);
    auto [x, report] = solve_cg(sys, cfg.cg_tol, max_iter, warm);
    if (!report.converged) {
      throw run_aborted("solver did not converge at iteration " +
                            std::to_string(int(trace.iterations.size())) +
                            " (relative residual " +
                            fmt_double(report.final_residual) + ")",
                        report, trace);
    }
    u.values = std::move(x);
    return report;
  };

  CellField v = indicator_field(cover, grid);
  solve_for_cover(v, nullptr);

  StopReason stopped_by = StopReason::max_iters;
  for (int k = 0; k < cfg.max_iters; ++k) {
    const CellGradients grads = cell_gradients(u, grid);
    const auto batch = select_batch_detail(grads.gsq, cover, grid, cfg);
    if (batch.empty()) {
      stopped_by = all_cells_covered(cover, grid) ? StopReason::no_candidates
                                                  : StopReason::threshold;
      break;
    }

    IterationRecord rec;
    rec.iter = k;
    for (const auto& c : batch) {
      cover.insert(c.center[0], c.center[1]);
      rec.centers.push_back(c.center);
      rec.predicted_delta_J.push_back(predicted_delta_G(c.gsq, cfg) +
                                      2.0 * cfg.beta * cfg.epsilon);
      const double dist_to_boundary =
          std::min({c.center[0], c.center[1], grid.width() - c.center[0],
                    grid.height() - c.center[1]});
      rec.ball_exits_domain.push_back(dist_to_boundary < cfg.epsilon);
    }

    v = indicator_field(cover, grid);
    rec.solver = solve_for_cover(v, &u.values);
    rec.energy = energy_J(u, cover, grid, cfg.alpha, cfg.beta);
    trace.iterations.push_back(std::move(rec));
  }

  SegmentationResult result{std::move(u), std::move(cover), CellField{},
                            std::move(trace), stopped_by};
  result.v = indicator_field(result.cover, grid);
  return result;
}

std::string trace_csv_string(const RunTrace& trace) {
  std::string out =
      "iter,n_new_balls,n_total_balls,fidelity,dirichlet,length,total,cg_iters\n";
  std::size_t total_balls = 0;
  for (const auto& rec : trace.iterations) {
    total_balls += rec.centers.size();
    out += std::to_string(rec.iter) + "," + std::to_string(rec.centers.size()) +
           "," + std::to_string(total_balls) + "," + fmt_double(rec.energy.fidelity) +
           "," + fmt_double(rec.energy.dirichlet) + "," +
           fmt_double(rec.energy.length) + "," + fmt_double(rec.energy.total) +
           "," + std::to_string(rec.solver.iterations) + "\n";
  }
  return out;
}

void save_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  write_text_file(path, trace_csv_string(trace));
}

}  // namespace topoms
