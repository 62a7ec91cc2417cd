#pragma once

#include <cmath>
#include <string>

#include "emhd/errors.hpp"

namespace emhd {

// Parameters of the finite-dimensional cascade system.
// A is the amplitude ratio, r the length ratio, n the bubble count,
// delta the coupling floor, b the model coefficient.
struct CascadeParams {
  double A = 2.0;
  double r = 0.05;
  int n = 30;
  double delta = 1.0;
  double b = 1.0;

  void validate() const {
    if (!(A > 1.0))
      throw ConfigError("cascade: requires A > 1 (got A=" + std::to_string(A) +
                        "); only the trivial root exists otherwise");
    if (!(r > 0.0 && r < 0.125))
      throw ConfigError("cascade: requires r in (0, 1/8), got r=" + std::to_string(r));
    if (!(A * r < 1.0))
      throw ConfigError("cascade: A*r >= 1 breaks the geometric interaction sums");
    if (!(A * std::sqrt(r) < 1.0))
      throw ConfigError("cascade: A*r^{1/2} >= 1 breaks the H^3 tail bound");
    if (n < 0) throw ConfigError("cascade: n must be >= 0");
    // Double precision spans x_k ~ A^n; cap so A^n stays far from overflow.
    const double max_n = 18.0 / std::log10(A);
    if (n > 64 || n > max_n)
      throw ConfigError("cascade: n=" + std::to_string(n) +
                        " exceeds the double-precision span cap (A^n <= 1e18, n <= 64)");
    if (!(delta > 0.0)) throw ConfigError("cascade: delta must be > 0");
    if (b == 0.0) throw ConfigError("cascade: b must be nonzero");
  }
};

// Exponents of the profile ansatz B_k = x_k^c (r/A)^{d k} W_k(.).
struct ProfileExponents {
  double c = 4.0;
  double d = 3.0;
};

// Every constant of the construction in one validated record.
struct ModelParams {
  double b = 1.0;
  double A = 2.0;
  double r = 0.05;
  int n = 12;
  double epsilon = 0.1;
  ProfileExponents exponents;
  double T = 0.0;           // 0 = discover the bootstrap window automatically
  double mu = 0.0;          // optional dissipation mu * Lambda^alpha
  double alpha = 2.0;
  bool include_b_in_ode = true;
  int pts_per_bubble = 512;
  double margin = 0.0;      // 0 = default 2r

  double margin_or_default() const { return margin > 0.0 ? margin : 2.0 * r; }
  // Reference grid half-width: covers +-[1-2r-margin, 1+2r+margin].
  double grid_halfwidth() const { return 1.0 + 2.0 * r + margin_or_default(); }

  CascadeParams cascade(double delta = 0.0) const {
    CascadeParams cp;
    cp.A = A;
    cp.r = r;
    cp.n = n;
    cp.delta = delta > 0 ? delta : 1.0;
    cp.b = b;
    return cp;
  }

  void validate() const {
    cascade().validate();
    if (!(epsilon > 0.0)) throw ConfigError("params: epsilon must be > 0");
    if (pts_per_bubble < 64)
      throw ConfigError("params: pts_per_bubble must be >= 64");
    if (mu < 0.0) throw ConfigError("params: mu must be >= 0");
    if (!(alpha > 0.0)) throw ConfigError("params: alpha must be > 0");
    if (T < 0.0) throw ConfigError("params: T must be >= 0 (window length)");
  }
};

}  // namespace emhd
