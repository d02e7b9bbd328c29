#include "topoms/energy.hpp"

#include <stdexcept>

#include "topoms/csv.hpp"

namespace topoms {

namespace {

struct Corners {
  double sw, se, ne, nw;
};

Corners corners(const NodalField& u, int i, int j) {
  return {u.at(i, j), u.at(i + 1, j), u.at(i + 1, j + 1), u.at(i, j + 1)};
}

}  // namespace

EnergyBreakdown energy_G(const NodalField& u, const CellField& v,
                         const ImageGrid& grid, double alpha) {
  if (!u.matches(grid) || !v.matches(grid)) {
    throw std::invalid_argument("field dimensions do not match grid");
  }
  const double h2 = grid.h() * grid.h();
  double fid = 0.0;
  double dir = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const Corners cu = corners(u, i, j);
      const double fsw = grid.f()[grid.node_index(i, j)];
      const double fse = grid.f()[grid.node_index(i + 1, j)];
      const double fne = grid.f()[grid.node_index(i + 1, j + 1)];
      const double fnw = grid.f()[grid.node_index(i, j + 1)];
      fid += h2 * element_mass_quadform_unit(cu.sw - fsw, cu.se - fse,
                                             cu.ne - fne, cu.nw - fnw);
      dir += v.at(i, j) * element_stiffness_quadform(cu.sw, cu.se, cu.ne, cu.nw);
    }
  }
  EnergyBreakdown e;
  e.fidelity = 0.5 * fid;
  e.dirichlet = 0.5 * alpha * dir;
  e.length = 0.0;
  e.total = e.fidelity + e.dirichlet + e.length;
  return e;
}

EnergyBreakdown energy_J(const NodalField& u, const BallCover& cover,
                         const ImageGrid& grid, double alpha, double beta) {
  EnergyBreakdown e = energy_G(u, indicator_field(cover, grid), grid, alpha);
  e.length = 2.0 * beta * cover.epsilon() * double(cover.ball_count());
  e.total = e.fidelity + e.dirichlet + e.length;
  return e;
}

EnergyBreakdown energy_AT(const NodalField& u, const NodalField& v,
                          const ImageGrid& grid, double alpha, double beta,
                          double eps_at) {
  if (!u.matches(grid) || !v.matches(grid)) {
    throw std::invalid_argument("field dimensions do not match grid");
  }
  const double h2 = grid.h() * grid.h();
  double fid = 0.0;
  double dir = 0.0;
  double grad_v = 0.0;
  double well = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const Corners cu = corners(u, i, j);
      const Corners cv = corners(v, i, j);
      const double fsw = grid.f()[grid.node_index(i, j)];
      const double fse = grid.f()[grid.node_index(i + 1, j)];
      const double fne = grid.f()[grid.node_index(i + 1, j + 1)];
      const double fnw = grid.f()[grid.node_index(i, j + 1)];
      fid += h2 * element_mass_quadform_unit(cu.sw - fsw, cu.se - fse,
                                             cu.ne - fne, cu.nw - fnw);
      const double vc = 0.25 * (cv.sw + cv.se + cv.ne + cv.nw);
      dir += vc * vc * element_stiffness_quadform(cu.sw, cu.se, cu.ne, cu.nw);
      grad_v += element_stiffness_quadform(cv.sw, cv.se, cv.ne, cv.nw);
      well += h2 * element_mass_quadform_unit(cv.sw - 1.0, cv.se - 1.0,
                                              cv.ne - 1.0, cv.nw - 1.0);
    }
  }
  EnergyBreakdown e;
  e.fidelity = 0.5 * fid;
  e.dirichlet = 0.5 * alpha * dir;
  e.length = beta * (eps_at * grad_v + well / (4.0 * eps_at));
  e.total = e.fidelity + e.dirichlet + e.length;
  return e;
}

std::string energy_csv_row(int iter, const EnergyBreakdown& e) {
  return std::to_string(iter) + "," + fmt_double(e.fidelity) + "," +
         fmt_double(e.dirichlet) + "," + fmt_double(e.length) + "," +
         fmt_double(e.total);
}

}  // namespace topoms
