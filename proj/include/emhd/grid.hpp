#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "emhd/errors.hpp"

namespace emhd {

// Uniform 1D grid with points x_min + i*h, i = 0..n-1, h = (x_max-x_min)/n.
// The right endpoint is excluded, which makes the same grid usable for the
// periodic spectral path and for compactly supported line fields.
struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  int n = 0;

  double h() const { return (x_max - x_min) / n; }
  double point(int i) const { return x_min + i * h(); }
  double length() const { return x_max - x_min; }

  bool power_of_two() const { return n >= 8 && (n & (n - 1)) == 0; }

  // Index of the grid point nearest to x (clamped).
  int nearest(double x) const {
    int i = static_cast<int>(std::lround((x - x_min) / h()));
    if (i < 0) i = 0;
    if (i >= n) i = n - 1;
    return i;
  }

  bool symmetric() const {
    // Symmetric about 0 in the node sense: -point(i) is again a node for i>=1.
    return std::abs(x_min + x_max - h()) < 1e-12 * (std::abs(x_min) + std::abs(x_max) + h());
  }

  void validate() const {
    if (n < 8) throw ConfigError("grid: n_points must be >= 8, got " + std::to_string(n));
    if (!(x_max > x_min)) throw ConfigError("grid: x_max must exceed x_min");
  }

  bool operator==(const Grid& o) const {
    return x_min == o.x_min && x_max == o.x_max && n == o.n;
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

enum class Parity { None, Odd, Even };

std::string to_string(Parity p);
Parity parity_from_string(const std::string& s);

// Real field sampled on a uniform grid with explicit support metadata.
// Carrier for B, J, W, phi and their derivatives.
struct SampledField {
  Grid grid;
  std::vector<double> values;
  std::vector<Interval> support;  // 0, 1 or 2 closed intervals
  Parity parity = Parity::None;

  bool in_support(double x) const {
    if (support.empty()) return true;
    for (const auto& iv : support)
      if (iv.contains(x)) return true;
    return false;
  }

  // Signed distance from x to the support (0 if inside).
  double support_distance(double x) const;

  double max_abs() const;

  // Throws InvalidFieldError on NaN/Inf; checks support and parity claims.
  void validate(double support_tol = 1e-11, double parity_tol = 1e-8) const;
};

SampledField make_field(const Grid& g, Parity parity = Parity::None);

// Finite differences on the uniform grid, zero-extension outside.
// Orders 1,2 are 4th-order accurate (5-point), orders 3,4 are 2nd-order.
std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order);

// Trapezoid integral over the grid (h * sum).
double integrate(const std::vector<double>& f, double h);

double l2_norm(const std::vector<double>& f, double h);

}  // namespace emhd
