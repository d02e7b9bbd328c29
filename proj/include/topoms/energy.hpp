#pragma once

#include <string>

#include "topoms/cover.hpp"
#include "topoms/fem.hpp"
#include "topoms/grid.hpp"

namespace topoms {

struct EnergyBreakdown {
  double fidelity = 0.0;   // 1/2 integral (u-f)^2
  double dirichlet = 0.0;  // weighted gradient term
  double length = 0.0;     // edge-length term
  double total = 0.0;      // sum of the three
};

/// Smoothing energy
///   G(u,v) = 1/2 integral (u-f)^2 + alpha/2 integral v |grad u|^2
/// with v cellwise constant.  Integrated elementwise with the exact
/// element quadratic forms (equivalent to 2x2 Gauss, which is exact for
/// these integrands).  length is 0.
EnergyBreakdown energy_G(const NodalField& u, const CellField& v,
                         const ImageGrid& grid, double alpha);

/// Ball-cover energy: energy_G with v = indicator_field(cover) plus the
/// length surrogate 2*beta*epsilon*ball_count.
EnergyBreakdown energy_J(const NodalField& u, const BallCover& cover,
                         const ImageGrid& grid, double alpha, double beta);

/// Phase-field energy
///   fidelity  = 1/2 integral (u-f)^2
///   dirichlet = alpha/2 integral v^2 |grad u|^2, with v^2 sampled at
///               cell centers (the same cellwise coefficient the
///               alternating u-solve uses, so the alternating scheme is
///               exact coordinate descent of this functional)
///   length    = beta integral ( eps_at |grad v|^2 + (v-1)^2/(4 eps_at) )
EnergyBreakdown energy_AT(const NodalField& u, const NodalField& v,
                          const ImageGrid& grid, double alpha, double beta,
                          double eps_at);

/// One CSV row `iter,fidelity,dirichlet,length,total`.
std::string energy_csv_row(int iter, const EnergyBreakdown& e);

}  // namespace topoms
