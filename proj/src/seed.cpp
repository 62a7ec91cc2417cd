#include "emhd/seed.hpp"

#include <cmath>

#include "emhd/hilbert.hpp"

namespace emhd {

double seed_value(double x, double r) {
  const double s = std::abs(x) - 1.0;
  if (std::abs(s) >= r) return 0.0;
  const double q = s * s / (r * r - s * s);
  return (x > 0 ? -1.0 : 1.0) * std::exp(-q);
}

SeedProfile make_seed_profile(double r, int grid_points, double margin) {
  if (!(r > 0.0 && r < 0.125))
    throw ConfigError("make_seed_profile: r must lie in (0, 1/8)");
  if (margin <= 0.0) margin = 2.0 * r;
  const double X = 1.0 + 2.0 * r + margin;

  SeedProfile sp;
  sp.r = r;
  Grid g{-X, X, grid_points};
  g.validate();
  sp.field = make_field(g, Parity::Odd);
  for (int i = 0; i < g.n; ++i) sp.field.values[i] = seed_value(g.point(i), r);
  sp.field.support = {{-1.0 - r, -1.0 + r}, {1.0 - r, 1.0 + r}};
  sp.field.validate();

  // delta0 = d^2(H phi)(0) = (2/pi) int phi(y) (0-y)^{-3} dy, far-field kernel
  // (0 is outside the support since 1 - r > 0).
  sp.delta0 = hilbert_derivative_at(sp.field, 0.0, 2);
  if (!(sp.delta0 > 0.0))
    throw NumericalError("make_seed_profile: H phi''(0) <= 0; kernel convention violated");
  return sp;
}

}  // namespace emhd
