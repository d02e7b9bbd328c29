#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "topoms/cover.hpp"
#include "topoms/energy.hpp"
#include "topoms/fem.hpp"
#include "topoms/grid.hpp"

namespace topoms {

/// Parameters of the greedy ball-insertion driver.
struct TopoConfig {
  double alpha = 0.04;
  double beta = 0.005;
  double epsilon = 0.05;   // ball radius, domain units
  double kappa = 0.01;     // contrast inside balls, in (0,1)
  int batch_size = 16;     // balls inserted per iteration
  double separation = 0.05;  // min distance between same-batch centers
  int max_iters = 1000;
  double cg_tol = 1e-9;

  /// Range checks that do not need a grid:
  ///   alpha, beta, epsilon > 0; kappa in (0,1); alpha*kappa < 1;
  ///   kappa <= epsilon; batch_size >= 1; separation >= 0.
  void validate() const;
  /// Adds the grid-dependent check epsilon >= 2h.
  void validate_for(const ImageGrid& grid) const;
};

/// Per-iteration record: what was inserted, the gain the expansion
/// predicted for each ball, and the recomputed exact energy after the
/// re-solve (recomputation is mandatory; the audit trail is the ground
/// truth the acceptance checks read).
struct IterationRecord {
  int iter = 0;
  std::vector<std::array<double, 2>> centers;
  std::vector<double> predicted_delta_J;
  std::vector<bool> ball_exits_domain;  // center closer than epsilon to the boundary
  EnergyBreakdown energy;
  SolverReport solver;
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  double cg_tol = 1e-9;
  int batch_size = 1;
};

enum class StopReason { threshold, max_iters, no_candidates };
const char* to_string(StopReason r);

struct SegmentationResult {
  NodalField u;
  BallCover cover;
  CellField v;  // indicator_field(cover)
  RunTrace trace;
  StopReason stopped_by = StopReason::threshold;
};

/// Leading-order change of the smoothing energy when a ball of radius
/// epsilon is inserted at a point where |grad u|^2 = gsq_value:
///   -epsilon^2 * pi * alpha * (1-kappa)/(1+kappa) * gsq_value.
double predicted_delta_G(double gsq_value, const TopoConfig& cfg);

/// True iff inserting a ball at such a point does not increase the
/// total energy:  alpha/2 * pi * (1-kappa)/(1+kappa) * gsq >= beta/epsilon,
/// i.e. predicted_delta_G + 2*beta*epsilon <= 0 (equality accepted).
bool accept_test(double gsq_value, const TopoConfig& cfg);

/// Greedy batch selection over cell centers: scan in decreasing gsq
/// order (ties by smallest row-major cell index); skip cells inside the
/// existing cover, candidates within `separation` of an already-selected
/// center, and candidates failing accept_test.  Returns up to
/// batch_size centers, possibly none.
std::vector<std::array<double, 2>> select_batch(const CellField& gsq,
                                                const BallCover& cover,
                                                const ImageGrid& grid,
                                                const TopoConfig& cfg);

/// The full loop: build the indicator from the current cover, solve the
/// smoothing problem (warm-started), recover gradients, insert the best
/// batch, re-solve and log the exact energy; stop when no candidate
/// passes, when everything is covered, or at max_iters.
SegmentationResult run(const ImageGrid& grid, const TopoConfig& cfg);

/// Thrown when a solve inside run() fails to converge; carries the
/// iterations completed so far.
struct run_aborted : solver_error {
  RunTrace partial_trace;
  run_aborted(const std::string& msg, SolverReport rep, RunTrace trace)
      : solver_error(msg, rep), partial_trace(std::move(trace)) {}
};

/// CSV: `iter,n_new_balls,n_total_balls,fidelity,dirichlet,length,total,cg_iters`.
std::string trace_csv_string(const RunTrace& trace);
void save_trace_csv(const RunTrace& trace, const std::filesystem::path& path);

}  // namespace topoms
