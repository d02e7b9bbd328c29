#pragma once

#include "topoms/fem.hpp"
#include "topoms/grid.hpp"
#include "topoms/topo.hpp"

namespace topoms {

/// Parameters of the alternating phase-field scheme.
struct ATConfig {
  double alpha = 0.04;
  double beta = 0.005;
  double eps_at = 0.05;   // phase-field width
  int outer_iters = 30;   // full (u,v) sweeps
  double cg_tol = 1e-9;
  double threshold = 0.8;  // edge threshold on v, in (0,1)
  double eta = 1e-6;       // ellipticity floor for the u-solve coefficient

  void validate() const;
};

/// Exact minimizer over u for fixed v of the discrete phase-field
/// energy: solves integral (u-f) phi + alpha * c * <grad u, grad phi> = 0
/// with c = max(v^2, eta) and v^2 evaluated at cell centers.
NodalField at_solve_u(const NodalField& v, const ImageGrid& grid,
                      const ATConfig& cfg, SolverReport* report = nullptr,
                      const NodalField* warm_start = nullptr);

/// Exact minimizer over v for fixed u: solves
///   integral (alpha |grad u|^2 + beta/(2 eps)) v phi
///   + 2 beta eps integral <grad v, grad phi> = integral beta/(2 eps) phi
/// with |grad u|^2 cellwise constant (its exact cell mean).  The
/// |grad u|^2 v phi term is integrated with the one-point cell-center
/// rule, which makes the u- and v-solves exact coordinate descent of
/// one and the same functional (the one energy_AT reports).
NodalField at_solve_v(const NodalField& u, const ImageGrid& grid,
                      const ATConfig& cfg, SolverReport* report = nullptr,
                      const NodalField* warm_start = nullptr);

struct ATResult {
  NodalField u;
  NodalField v;
  RunTrace trace;  // energy_AT after each full sweep
};

/// Alternating minimization starting from v = 1: outer_iters sweeps of
/// (u-solve, v-solve), energy recorded after each sweep.
ATResult run_at(const ImageGrid& grid, const ATConfig& cfg);

/// Cell marked 1 iff the bilinear v at the cell center is below the
/// threshold, else 0.  Throws config_error unless threshold is in (0,1).
CellField threshold_edges(const NodalField& v, const ImageGrid& grid,
                          double threshold);

}  // namespace topoms
