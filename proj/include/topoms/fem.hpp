#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "topoms/grid.hpp"

namespace topoms {

// Bilinear quadrilateral element on an h x h square, corner order
// SW, SE, NE, NW.  The stiffness matrix is h-independent in 2D; the
// mass matrix carries the h^2 factor.
//   K = 1/6 * [ 4 -1 -2 -1; -1 4 -1 -2; -2 -1 4 -1; -1 -2 -1 4 ]
//   M = h^2/36 * [ 4 2 1 2; 2 4 2 1; 1 2 4 2; 2 1 2 4 ]
std::array<std::array<double, 4>, 4> element_stiffness();
std::array<std::array<double, 4>, 4> element_mass(double h);

/// q^T K q for corner values q = (sw,se,ne,nw); equals the integral of
/// |grad u|^2 of the bilinear interpolant over the cell.
double element_stiffness_quadform(double sw, double se, double ne, double nw);

/// q^T M q without the h^2 factor; h^2 * this equals the integral of
/// the squared bilinear interpolant over the cell.
double element_mass_quadform_unit(double sw, double se, double ne, double nw);

/// Symmetric 9-point stencil operator on the node grid.  Off-grid
/// neighbor slots stay zero.
class StencilMatrix {
 public:
  StencilMatrix() = default;
  StencilMatrix(int nodes_x, int nodes_y);

  std::size_t size() const { return std::size_t(nnx_) * nny_; }
  int nodes_x() const { return nnx_; }
  int nodes_y() const { return nny_; }

  /// Accumulates into the coefficient coupling node (i,j) to (i+di, j+dj).
  void add(int i, int j, int di, int dj, double value);
  double coeff(int i, int j, int di, int dj) const;

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;

 private:
  int nnx_ = 0;
  int nny_ = 0;
  std::vector<double> a_;  // size*9, slot k = (dj+1)*3 + (di+1)
};

struct SparseSystem {
  StencilMatrix matrix;
  std::vector<double> rhs;
};

struct SolverReport {
  int iterations = 0;
  double final_residual = 0.0;  // relative preconditioned residual, 2-norm
  bool converged = false;
};

struct solver_error : std::runtime_error {
  SolverReport report;
  solver_error(const std::string& msg, SolverReport rep)
      : std::runtime_error(msg), report(rep) {}
};

/// Assembles the system for the smoothing problem
///   integral (u - f) phi + alpha * coeff * <grad u, grad phi> = 0
/// with natural (homogeneous Neumann) boundaries: element matrices
/// M_e + alpha*coeff_e*K_e, rhs = M f with f interpolated bilinearly.
/// Throws std::invalid_argument on a non-positive coefficient cell.
SparseSystem assemble(const ImageGrid& grid, const CellField& coeff,
                      double alpha);

/// General weighted assembly A = sum_e (mass_e * M_e + stiff_e * K_e),
/// rhs = M * load (unweighted mass applied to a nodal load).  Both
/// solvers in the alternating scheme and the smoothing problem are
/// instances of this form.
SparseSystem assemble_general(const ImageGrid& grid, const CellField& mass_coeff,
                              const CellField& stiff_coeff,
                              const NodalField& load);

/// Adds sum_e coeff_e * (h^2/16) * ones(4x4) to the system matrix: the
/// one-point (cell-center) quadrature of integral coeff * u * phi.
void add_midpoint_mass(SparseSystem& system, const ImageGrid& grid,
                       const CellField& coeff);

/// Jacobi-preconditioned conjugate gradients.  Stops when the relative
/// preconditioned residual drops to tol or max_iter is reached; the
/// caller decides whether non-convergence is fatal.  warm_start, when
/// given, seeds the initial iterate (zero otherwise).
std::pair<std::vector<double>, SolverReport> solve_cg(
    const SparseSystem& system, double tol, int max_iter,
    const std::vector<double>* warm_start = nullptr);

/// Default iteration cap: ceil(10*sqrt(n)) with floor 200.
int default_max_iter(std::size_t unknowns);

struct CellGradients {
  CellField gx;
  CellField gy;
  CellField gsq;  // gx^2 + gy^2
};

/// Gradient of the bilinear interpolant evaluated at cell centers:
///   gx = ((u_ne + u_se) - (u_nw + u_sw)) / (2h), gy analogously.
CellGradients cell_gradients(const NodalField& u, const ImageGrid& grid);

}  // namespace topoms
