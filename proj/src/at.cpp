#include "topoms/at.hpp"

#include <algorithm>
#include <cmath>

#include "topoms/energy.hpp"
#include "topoms/errors.hpp"

namespace topoms {

void ATConfig::validate() const {
  if (!(alpha > 0.0)) throw config_error("alpha must be positive");
  if (!(beta > 0.0)) throw config_error("beta must be positive");
  if (!(eps_at > 0.0)) throw config_error("eps_at must be positive");
  if (outer_iters < 1) throw config_error("outer_iters must be >= 1");
  if (!(cg_tol > 0.0)) throw config_error("cg_tol must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw config_error("threshold must lie strictly between 0 and 1");
  }
  if (!(eta > 0.0)) throw config_error("eta must be positive");
}

namespace {

NodalField run_solve(const SparseSystem& sys, const ImageGrid& grid,
                     double cg_tol, SolverReport* report,
                     const NodalField* warm_start, const char* what) {
  const std::vector<double>* warm =
      warm_start ? &warm_start->values : nullptr;
  auto [x, rep] = solve_cg(sys, cg_tol, default_max_iter(sys.matrix.size()), warm);
  if (report) *report = rep;
  if (!rep.converged) {
    throw solver_error(std::string(what) + " solve did not converge (relative residual " +
                           std::to_string(rep.final_residual) + ")",
                       rep);
  }
  NodalField out(grid);
  out.values = std::move(x);
  return out;
}

}  // namespace

NodalField at_solve_u(const NodalField& v, const ImageGrid& grid,
                      const ATConfig& cfg, SolverReport* report,
                      const NodalField* warm_start) {
  cfg.validate();
  if (!v.matches(grid)) {
    throw std::invalid_argument("v dimensions do not match grid");
  }
  CellField coeff(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double vc = 0.25 * (v.at(i, j) + v.at(i + 1, j) + v.at(i + 1, j + 1) +
                                v.at(i, j + 1));
      coeff.at(i, j) = std::max(vc * vc, cfg.eta);
    }
  }
  SparseSystem sys = assemble(grid, coeff, cfg.alpha);
  return run_solve(sys, grid, cfg.cg_tol, report, warm_start, "u");
}

NodalField at_solve_v(const NodalField& u, const ImageGrid& grid,
                      const ATConfig& cfg, SolverReport* report,
                      const NodalField* warm_start) {
  cfg.validate();
  if (!u.matches(grid)) {
    throw std::invalid_argument("u dimensions do not match grid");
  }
  const double b_over_2e = cfg.beta / (2.0 * cfg.eps_at);
  const double h2 = grid.h() * grid.h();

  CellField mass(grid, b_over_2e);
  CellField stiff(grid, 2.0 * cfg.beta * cfg.eps_at);
  NodalField load(grid, b_over_2e);
  SparseSystem sys = assemble_general(grid, mass, stiff, load);

  // alpha * |grad u|^2 * v * phi, |grad u|^2 taken as its exact cell mean
  CellField damping(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double gsq_mean =
          element_stiffness_quadform(u.at(i, j), u.at(i + 1, j),
                                     u.at(i + 1, j + 1), u.at(i, j + 1)) /
          h2;
      damping.at(i, j) = cfg.alpha * gsq_mean;
    }
  }
  add_midpoint_mass(sys, grid, damping);
  return run_solve(sys, grid, cfg.cg_tol, report, warm_start, "v");
}

ATResult run_at(const ImageGrid& grid, const ATConfig& cfg) {
  cfg.validate();
  NodalField u(grid);
  NodalField v(grid, 1.0);
  RunTrace trace;
  trace.cg_tol = cfg.cg_tol;
  trace.batch_size = 1;

  for (int sweep = 0; sweep < cfg.outer_iters; ++sweep) {
    SolverReport u_rep, v_rep;
    u = at_solve_u(v, grid, cfg, &u_rep, sweep > 0 ? &u : nullptr);
    v = at_solve_v(u, grid, cfg, &v_rep, sweep > 0 ? &v : nullptr);

    IterationRecord rec;
    rec.iter = sweep;
    rec.energy = energy_AT(u, v, grid, cfg.alpha, cfg.beta, cfg.eps_at);
    rec.solver.iterations = u_rep.iterations + v_rep.iterations;
    rec.solver.converged = u_rep.converged && v_rep.converged;
    rec.solver.final_residual =
        std::max(u_rep.final_residual, v_rep.final_residual);
    trace.iterations.push_back(std::move(rec));
  }
  return ATResult{std::move(u), std::move(v), std::move(trace)};
}

CellField threshold_edges(const NodalField& v, const ImageGrid& grid,
                          double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw config_error("threshold must lie strictly between 0 and 1");
  }
  if (!v.matches(grid)) {
    throw std::invalid_argument("v dimensions do not match grid");
  }
  CellField edges(grid, 0.0);
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double vc = 0.25 * (v.at(i, j) + v.at(i + 1, j) + v.at(i + 1, j + 1) +
                                v.at(i, j + 1));
      edges.at(i, j) = (vc < threshold) ? 1.0 : 0.0;
    }
  }
  return edges;
}

}  // namespace topoms
