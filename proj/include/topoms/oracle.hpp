#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "topoms/cover.hpp"
#include "topoms/grid.hpp"
#include "topoms/topo.hpp"

namespace topoms {

// Independent verification machinery: the predictions of
// predicted_delta_G are checked against exact energy differences
// obtained by re-solving, and the solver itself is checked against a
// closed-form solution.  Oracle solves tighten cg_tol by 100x since
// the energy differences are small compared to the energies.

/// Exact change of the smoothing energy when the ball B_epsilon(y) is
/// added to `cover`: solves before and after and returns
/// G(after) - G(before).  Requires y outside the current union.
double delta_G_exact(const ImageGrid& grid, const BallCover& cover,
                     std::array<double, 2> y, const TopoConfig& cfg);

struct ExpansionProbe {
  std::array<double, 2> center{};      // snapped to the nearest cell center
  std::vector<double> epsilons;        // decreasing
  std::vector<double> predicted;       // leading-order expansion values
  std::vector<double> exact;           // re-solve differences
  std::vector<double> rel_errors;      // |exact-pred|/|pred|; absolute if degenerate
  double gsq_at_center = 0.0;
  bool degenerate = false;  // |predicted| below 1e-12 even at the largest radius
};

/// Runs the radius sweep at a fixed probe point against the empty
/// cover.  Preconditions (violations throw config_error naming the
/// failed bound): h <= min(epsilons)/8 and the probe point at least
/// 3*max(epsilons) away from the domain boundary.
ExpansionProbe expansion_probe(const ImageGrid& grid, std::array<double, 2> y,
                               std::vector<double> epsilons,
                               const TopoConfig& cfg);

struct ConvergenceRow {
  double h;
  double l2_error;
};

/// Solves u - alpha*lap(u) = (1 + 2*alpha*pi^2) cos(pi x) cos(pi y) on
/// square grids of the given sizes and records the nodal L2 error
/// against the closed-form solution cos(pi x) cos(pi y).
std::vector<ConvergenceRow> manufactured_convergence(
    const std::vector<int>& levels, double alpha);

/// True iff the recomputed energies in a batch_size=1 trace are
/// strictly decreasing, allowing 10*cg_tol relative slack per
/// comparison.  Vacuously true for an empty trace.
bool descent_audit(const RunTrace& trace);

/// CSV `epsilon,predicted,exact,rel_error`.
std::string probe_csv_string(const ExpansionProbe& probe);
void save_probe_csv(const ExpansionProbe& probe,
                    const std::filesystem::path& path);

/// CSV `h,l2_error,ratio` (ratio of the previous error to this one;
/// empty on the first row).
std::string convergence_csv_string(const std::vector<ConvergenceRow>& rows);
void save_convergence_csv(const std::vector<ConvergenceRow>& rows,
                          const std::filesystem::path& path);

}  // namespace topoms
