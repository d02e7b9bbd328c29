#pragma once

#include "topoms/grid.hpp"

namespace topoms {

// Analytic test images rendered at grid nodes, all with values in [0,1].

ImageGrid make_constant(int n, double value);

/// f = 0 for x < 1/2, 1 for x >= 1/2 (vertical step at x = 1/2).
ImageGrid make_step(int n);

/// f = base + amplitude * exp(-((x-cx)^2+(y-cy)^2) / (2 sigma^2)).
ImageGrid make_gaussian_bump(int n, double cx, double cy, double sigma,
                             double base, double amplitude);

/// f = x (linear ramp along x).
ImageGrid make_ramp(int n);

}  // namespace topoms
