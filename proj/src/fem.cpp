#include "topoms/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace topoms {

namespace {

// corner order SW, SE, NE, NW
constexpr double kStiff[4][4] = {
    {4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0},
    {-2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0}};

constexpr double kMassUnit[4][4] = {
    {4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0, 2.0 / 36.0},
    {2.0 / 36.0, 4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0},
    {1.0 / 36.0, 2.0 / 36.0, 4.0 / 36.0, 2.0 / 36.0},
    {2.0 / 36.0, 1.0 / 36.0, 2.0 / 36.0, 4.0 / 36.0}};

// corner offsets within a cell, same order
constexpr int kCornerDi[4] = {0, 1, 1, 0};
constexpr int kCornerDj[4] = {0, 0, 1, 1};

}  // namespace

std::array<std::array<double, 4>, 4> element_stiffness() {
  std::array<std::array<double, 4>, 4> k{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) k[a][b] = kStiff[a][b];
  return k;
}

std::array<std::array<double, 4>, 4> element_mass(double h) {
  std::array<std::array<double, 4>, 4> m{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m[a][b] = h * h * kMassUnit[a][b];
  return m;
}

double element_stiffness_quadform(double sw, double se, double ne, double nw) {
  const double sum2 = sw * sw + se * se + ne * ne + nw * nw;
  const double adj = sw * se + se * ne + ne * nw + nw * sw;
  const double opp = sw * ne + se * nw;
  return (4.0 * sum2 - 2.0 * adj - 4.0 * opp) / 6.0;
}

double element_mass_quadform_unit(double sw, double se, double ne, double nw) {
  const double sum2 = sw * sw + se * se + ne * ne + nw * nw;
  const double adj = sw * se + se * ne + ne * nw + nw * sw;
  const double opp = sw * ne + se * nw;
  return (4.0 * sum2 + 4.0 * adj + 2.0 * opp) / 36.0;
}

StencilMatrix::StencilMatrix(int nodes_x, int nodes_y)
    : nnx_(nodes_x), nny_(nodes_y), a_(std::size_t(nodes_x) * nodes_y * 9, 0.0) {}

void StencilMatrix::add(int i, int j, int di, int dj, double value) {
  const std::size_t row = std::size_t(j) * nnx_ + i;
  a_[row * 9 + std::size_t((dj + 1) * 3 + (di + 1))] += value;
}

double StencilMatrix::coeff(int i, int j, int di, int dj) const {
  const std::size_t row = std::size_t(j) * nnx_ + i;
  return a_[row * 9 + std::size_t((dj + 1) * 3 + (di + 1))];
}

void StencilMatrix::apply(std::span<const double> x, std::span<double> y) const {
  const int nnx = nnx_, nny = nny_;
  for (int j = 0; j < nny; ++j) {
    const bool jin = (j > 0 && j < nny - 1);
    for (int i = 0; i < nnx; ++i) {
      const std::size_t row = std::size_t(j) * nnx + i;
      const double* c = &a_[row * 9];
      if (jin && i > 0 && i < nnx - 1) {
        const double* xr = &x[row];
        y[row] = c[0] * xr[-nnx - 1] + c[1] * xr[-nnx] + c[2] * xr[-nnx + 1] +
                 c[3] * xr[-1] + c[4] * xr[0] + c[5] * xr[1] +
                 c[6] * xr[nnx - 1] + c[7] * xr[nnx] + c[8] * xr[nnx + 1];
      } else {
        double acc = 0.0;
        for (int dj = -1; dj <= 1; ++dj) {
          const int jj = j + dj;
          if (jj < 0 || jj >= nny) continue;
          for (int di = -1; di <= 1; ++di) {
            const int ii = i + di;
            if (ii < 0 || ii >= nnx) continue;
            acc += c[(dj + 1) * 3 + (di + 1)] * x[std::size_t(jj) * nnx + ii];
          }
        }
        y[row] = acc;
      }
    }
  }
}

std::vector<double> StencilMatrix::diagonal() const {
  std::vector<double> d(size());
  for (std::size_t row = 0; row < d.size(); ++row) d[row] = a_[row * 9 + 4];
  return d;
}

SparseSystem assemble_general(const ImageGrid& grid, const CellField& mass_coeff,
                              const CellField& stiff_coeff,
                              const NodalField& load) {
  if (!mass_coeff.matches(grid) || !stiff_coeff.matches(grid) ||
      !load.matches(grid)) {
    throw std::invalid_argument("assembly input dimensions do not match grid");
  }
  const double h2 = grid.h() * grid.h();
  SparseSystem sys;
  sys.matrix = StencilMatrix(grid.nodes_x(), grid.nodes_y());
  sys.rhs.assign(grid.node_count(), 0.0);

  for (int cj = 0; cj < grid.ny(); ++cj) {
    for (int ci = 0; ci < grid.nx(); ++ci) {
      const double me = mass_coeff.at(ci, cj) * h2;
      const double se = stiff_coeff.at(ci, cj);
      double fe[4];
      for (int a = 0; a < 4; ++a) {
        fe[a] = load.at(ci + kCornerDi[a], cj + kCornerDj[a]);
      }
      for (int a = 0; a < 4; ++a) {
        const int ia = ci + kCornerDi[a];
        const int ja = cj + kCornerDj[a];
        double rhs_a = 0.0;
        for (int b = 0; b < 4; ++b) {
          const int di = kCornerDi[b] - kCornerDi[a];
          const int dj = kCornerDj[b] - kCornerDj[a];
          sys.matrix.add(ia, ja, di, dj,
                         me * kMassUnit[a][b] + se * kStiff[a][b]);
          rhs_a += h2 * kMassUnit[a][b] * fe[b];
        }
        sys.rhs[grid.node_index(ia, ja)] += rhs_a;
      }
    }
  }
  return sys;
}

SparseSystem assemble(const ImageGrid& grid, const CellField& coeff,
                      double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!coeff.matches(grid)) {
    throw std::invalid_argument("coefficient dimensions do not match grid");
  }
  CellField stiff(grid);
  for (std::size_t k = 0; k < coeff.values.size(); ++k) {
    const double v = coeff.values[k];
    if (!(v > 0.0)) {
      throw std::invalid_argument(
          "non-positive diffusion coefficient in cell " + std::to_string(k) +
          " (value " + std::to_string(v) + ") violates ellipticity");
    }
    stiff.values[k] = alpha * v;
  }
  CellField unit_mass(grid, 1.0);
  NodalField load(grid);
  load.values = grid.f();
  return assemble_general(grid, unit_mass, stiff, load);
}

void add_midpoint_mass(SparseSystem& system, const ImageGrid& grid,
                       const CellField& coeff) {
  if (!coeff.matches(grid)) {
    throw std::invalid_argument("coefficient dimensions do not match grid");
  }
  if (system.matrix.nodes_x() != grid.nodes_x() ||
      system.matrix.nodes_y() != grid.nodes_y()) {
    throw std::invalid_argument("system dimensions do not match grid");
  }
  const double h2_16 = grid.h() * grid.h() / 16.0;
  for (int cj = 0; cj < grid.ny(); ++cj) {
    for (int ci = 0; ci < grid.nx(); ++ci) {
      const double w = coeff.at(ci, cj) * h2_16;
      if (w == 0.0) continue;
      for (int a = 0; a < 4; ++a) {
        const int ia = ci + kCornerDi[a];
        const int ja = cj + kCornerDj[a];
        for (int b = 0; b < 4; ++b) {
          system.matrix.add(ia, ja, kCornerDi[b] - kCornerDi[a],
                            kCornerDj[b] - kCornerDj[a], w);
        }
      }
    }
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::pair<std::vector<double>, SolverReport> solve_cg(
    const SparseSystem& system, double tol, int max_iter,
    const std::vector<double>* warm_start) {
  const std::size_t n = system.matrix.size();
  if (system.rhs.size() != n) {
    throw std::invalid_argument("rhs size does not match matrix dimension");
  }
  if (warm_start && warm_start->size() != n) {
    throw std::invalid_argument("warm start size does not match system");
  }

  const std::vector<double> diag = system.matrix.diagonal();
  std::vector<double> inv_diag(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(diag[k] > 0.0)) {
      throw std::invalid_argument("non-positive diagonal entry; system not SPD");
    }
    inv_diag[k] = 1.0 / diag[k];
  }

  // preconditioned norm of the rhs fixes the convergence scale
  double b_scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    b_scale += system.rhs[k] * system.rhs[k] * inv_diag[k];
  }
  b_scale = std::sqrt(b_scale);

  std::vector<double> x = warm_start ? *warm_start : std::vector<double>(n, 0.0);
  SolverReport report;
  if (b_scale == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return {std::move(x), report};
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  system.matrix.apply(x, r);
  for (std::size_t k = 0; k < n; ++k) r[k] = system.rhs[k] - r[k];
  for (std::size_t k = 0; k < n; ++k) z[k] = r[k] * inv_diag[k];
  double rz = dot(r, z);
  double rel = std::sqrt(std::max(rz, 0.0)) / b_scale;
  if (rel <= tol) {
    report.converged = true;
    report.final_residual = rel;
    return {std::move(x), report};
  }
  p = z;

  for (int it = 1; it <= max_iter; ++it) {
    system.matrix.apply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      report.iterations = it;
      report.final_residual = rel;
      throw solver_error("conjugate gradients broke down (<p,Ap> <= 0)", report);
    }
    const double step = rz / pq;
    for (std::size_t k = 0; k < n; ++k) x[k] += step * p[k];
    for (std::size_t k = 0; k < n; ++k) r[k] -= step * q[k];
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] * inv_diag[k];
    const double rz_next = dot(r, z);
    rel = std::sqrt(std::max(rz_next, 0.0)) / b_scale;
    report.iterations = it;
    if (rel <= tol) {
      report.converged = true;
      break;
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  report.final_residual = rel;
  return {std::move(x), report};
}

int default_max_iter(std::size_t unknowns) {
  const int by_size = int(std::ceil(10.0 * std::sqrt(double(unknowns))));
  return std::max(200, by_size);
}

CellGradients cell_gradients(const NodalField& u, const ImageGrid& grid) {
  if (!u.matches(grid)) {
    throw std::invalid_argument("field dimensions do not match grid");
  }
  CellGradients g{CellField(grid), CellField(grid), CellField(grid)};
  const double inv2h = 1.0 / (2.0 * grid.h());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double sw = u.at(i, j);
      const double se = u.at(i + 1, j);
      const double ne = u.at(i + 1, j + 1);
      const double nw = u.at(i, j + 1);
      const double gx = ((ne + se) - (nw + sw)) * inv2h;
      const double gy = ((nw + ne) - (sw + se)) * inv2h;
      g.gx.at(i, j) = gx;
      g.gy.at(i, j) = gy;
      g.gsq.at(i, j) = gx * gx + gy * gy;
    }
  }
  return g;
}

}  // namespace topoms
