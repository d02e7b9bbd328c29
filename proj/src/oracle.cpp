#include "topoms/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "topoms/csv.hpp"
#include "topoms/energy.hpp"
#include "topoms/errors.hpp"
#include "topoms/fem.hpp"

namespace topoms {

namespace {

constexpr double kDegenerateThreshold = 1e-12;

NodalField tight_solve(const ImageGrid& grid, const CellField& v, double alpha,
                       double tol, const NodalField* warm) {
  SparseSystem sys = assemble(grid, v, alpha);
  const int max_iter = 10 * default_max_iter(sys.matrix.size());
  auto [x, rep] = solve_cg(sys, tol, max_iter, warm ? &warm->values : nullptr);
  if (!rep.converged) {
    throw solver_error("oracle solve did not converge (relative residual " +
                           fmt_double(rep.final_residual) + ")",
                       rep);
  }
  NodalField u(grid);
  u.values = std::move(x);
  return u;
}

}  // namespace

double delta_G_exact(const ImageGrid& grid, const BallCover& cover,
                     std::array<double, 2> y, const TopoConfig& cfg) {
  if (cover.contains(y[0], y[1])) {
    throw std::invalid_argument("probe center lies inside the current cover");
  }
  const double tol = cfg.cg_tol / 100.0;

  const CellField v_before = indicator_field(cover, grid);
  const NodalField u_before = tight_solve(grid, v_before, cfg.alpha, tol, nullptr);
  const double g_before = energy_G(u_before, v_before, grid, cfg.alpha).total;

  BallCover enlarged = cover;
  enlarged.insert(y[0], y[1]);
  const CellField v_after = indicator_field(enlarged, grid);
  const NodalField u_after = tight_solve(grid, v_after, cfg.alpha, tol, &u_before);
  const double g_after = energy_G(u_after, v_after, grid, cfg.alpha).total;

  return g_after - g_before;
}

ExpansionProbe expansion_probe(const ImageGrid& grid, std::array<double, 2> y,
                               std::vector<double> epsilons,
                               const TopoConfig& cfg) {
  if (epsilons.empty()) throw config_error("epsilon sweep is empty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) throw config_error("epsilons must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) {
      throw config_error("epsilons must be strictly decreasing");
    }
  }
  const double eps_min = epsilons.back();
  const double eps_max = epsilons.front();
  if (!(grid.h() <= eps_min / 8.0)) {
    throw config_error("grid too coarse for probe: h = " + fmt_double(grid.h()) +
                       " exceeds min(epsilon)/8 = " + fmt_double(eps_min / 8.0));
  }
  const double dist_to_boundary =
      std::min({y[0], y[1], grid.width() - y[0], grid.height() - y[1]});
  if (!(dist_to_boundary >= 3.0 * eps_max)) {
    throw config_error(
        "probe point too close to the boundary: distance " +
        fmt_double(dist_to_boundary) + " is below 3*max(epsilon) = " +
        fmt_double(3.0 * eps_max));
  }

  // snap to the nearest cell center; gradients are recovered there
  const double h = grid.h();
  const int ci = std::clamp(int(std::floor(y[0] / h)), 0, grid.nx() - 1);
  const int cj = std::clamp(int(std::floor(y[1] / h)), 0, grid.ny() - 1);

  ExpansionProbe probe;
  probe.center = {grid.cell_cx(ci), grid.cell_cy(cj)};
  probe.epsilons = std::move(epsilons);

  const double tol = cfg.cg_tol / 100.0;
  BallCover empty(cfg.epsilon, cfg.kappa, grid.width(), grid.height());
  const CellField v_base = indicator_field(empty, grid);
  const NodalField u_base = tight_solve(grid, v_base, cfg.alpha, tol, nullptr);
  const double g_base = energy_G(u_base, v_base, grid, cfg.alpha).total;
  probe.gsq_at_center = cell_gradients(u_base, grid).gsq.at(ci, cj);

  for (std::size_t k = 0; k < probe.epsilons.size(); ++k) {
    const double eps = probe.epsilons[k];
    TopoConfig local = cfg;
    local.epsilon = eps;

    BallCover single(eps, cfg.kappa, grid.width(), grid.height());
    single.insert(probe.center[0], probe.center[1]);
    const CellField v_ball = indicator_field(single, grid);
    const NodalField u_ball = tight_solve(grid, v_ball, cfg.alpha, tol, &u_base);
    const double exact = energy_G(u_ball, v_ball, grid, cfg.alpha).total - g_base;
    const double predicted = predicted_delta_G(probe.gsq_at_center, local);

    probe.predicted.push_back(predicted);
    probe.exact.push_back(exact);
    if (std::abs(predicted) < kDegenerateThreshold) {
      probe.rel_errors.push_back(std::abs(exact - predicted));
    } else {
      probe.rel_errors.push_back(std::abs(exact - predicted) / std::abs(predicted));
    }
  }
  probe.degenerate = std::abs(probe.predicted.front()) < kDegenerateThreshold;
  return probe;
}

std::vector<ConvergenceRow> manufactured_convergence(
    const std::vector<int>& levels, double alpha) {
  if (levels.empty()) throw config_error("convergence study needs at least one level");
  for (std::size_t k = 1; k < levels.size(); ++k) {
    if (levels[k] <= levels[k - 1]) {
      throw config_error("convergence levels must be strictly refining");
    }
  }
  if (!(alpha > 0.0)) throw config_error("alpha must be positive");

  const double pi = std::numbers::pi;
  std::vector<ConvergenceRow> rows;
  for (int n : levels) {
    const double h = 1.0 / n;
    std::vector<double> nodal(std::size_t(n + 1) * (n + 1));
    const double scale = 1.0 + 2.0 * alpha * pi * pi;
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        nodal[std::size_t(j) * (n + 1) + i] =
            scale * std::cos(pi * i * h) * std::cos(pi * j * h);
      }
    }
    ImageGrid grid(n, n, std::move(nodal));

    CellField unit(grid, 1.0);
    SparseSystem sys = assemble(grid, unit, alpha);
    auto [x, rep] =
        solve_cg(sys, 1e-12, 20 * default_max_iter(sys.matrix.size()), nullptr);
    if (!rep.converged) {
      throw solver_error("manufactured solve did not converge", rep);
    }

    NodalField err(grid);
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        err.at(i, j) = x[grid.node_index(i, j)] -
                       std::cos(pi * i * h) * std::cos(pi * j * h);
      }
    }
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        norm2 += h * h *
                 element_mass_quadform_unit(err.at(i, j), err.at(i + 1, j),
                                            err.at(i + 1, j + 1), err.at(i, j + 1));
      }
    }
    rows.push_back({h, std::sqrt(norm2)});
  }
  return rows;
}

bool descent_audit(const RunTrace& trace) {
  if (trace.batch_size != 1) {
    throw std::invalid_argument("descent audit requires a batch_size=1 trace");
  }
  for (std::size_t k = 1; k < trace.iterations.size(); ++k) {
    const double prev = trace.iterations[k - 1].energy.total;
    const double cur = trace.iterations[k].energy.total;
    const double slack = 10.0 * trace.cg_tol * std::max(1.0, std::abs(prev));
    if (!(cur - prev < slack)) return false;
  }
  return true;
}

std::string probe_csv_string(const ExpansionProbe& probe) {
  std::string out = "epsilon,predicted,exact,rel_error\n";
  for (std::size_t k = 0; k < probe.epsilons.size(); ++k) {
    out += fmt_double(probe.epsilons[k]) + "," + fmt_double(probe.predicted[k]) +
           "," + fmt_double(probe.exact[k]) + "," +
           fmt_double(probe.rel_errors[k]) + "\n";
  }
  return out;
}

void save_probe_csv(const ExpansionProbe& probe,
                    const std::filesystem::path& path) {
  write_text_file(path, probe_csv_string(probe));
}

std::string convergence_csv_string(const std::vector<ConvergenceRow>& rows) {
  std::string out = "h,l2_error,ratio\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += fmt_double(rows[k].h) + "," + fmt_double(rows[k].l2_error) + ",";
    if (k > 0 && rows[k].l2_error > 0.0) {
      out += fmt_double(rows[k - 1].l2_error / rows[k].l2_error);
    }
    out += "\n";
  }
  return out;
}

void save_convergence_csv(const std::vector<ConvergenceRow>& rows,
                          const std::filesystem::path& path) {
  write_text_file(path, convergence_csv_string(rows));
}

}  // namespace topoms
