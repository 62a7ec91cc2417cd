#pragma once

#include "emhd/grid.hpp"

namespace emhd {

// Odd C-infinity seed profile supported in +-[1-r, 1+r], strictly inside the
// bootstrap windows +-[1-2r, 1+2r]. Orientation makes delta0 = H phi''(0) > 0
// so the cascade couplings come out positive.
struct SeedProfile {
  SampledField field;
  double r = 0.0;
  double delta0 = 0.0;  // H phi''(0), computed by quadrature and cached
};

// phi(x) = -sgn(x) * exp(-(|x|-1)^2 / (r^2 - (|x|-1)^2)) on ||x|-1| < r,
// zero elsewhere; peak value 1 at |x| = 1. Sampled on the symmetric
// reference grid covering +-[1-2r-margin, 1+2r+margin].
SeedProfile make_seed_profile(double r, int grid_points, double margin = 0.0);

// Pointwise seed value (exact formula, no sampling).
double seed_value(double x, double r);

}  // namespace emhd
