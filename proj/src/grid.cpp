#include "emhd/grid.hpp"

#include <algorithm>
#include <cmath>

namespace emhd {

std::string to_string(Parity p) {
  switch (p) {
    case Parity::Odd: return "odd";
    case Parity::Even: return "even";
    default: return "none";
  }
}

Parity parity_from_string(const std::string& s) {
  if (s == "odd") return Parity::Odd;
  if (s == "even") return Parity::Even;
  if (s == "none" || s.empty()) return Parity::None;
  throw ConfigError("unknown parity '" + s + "'");
}

double SampledField::support_distance(double x) const {
  if (support.empty()) return 0.0;
  double d = 1e300;
  for (const auto& iv : support) {
    if (iv.contains(x)) return 0.0;
    d = std::min(d, std::min(std::abs(x - iv.lo), std::abs(x - iv.hi)));
  }
  return d;
}

double SampledField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void SampledField::validate(double support_tol, double parity_tol) const {
  grid.validate();
  if (static_cast<int>(values.size()) != grid.n)
    throw InvalidFieldError("field: values length does not match grid");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidFieldError("field: non-finite value");
  if (!support.empty()) {
    const double scale = std::max(max_abs(), 1e-300);
    for (int i = 0; i < grid.n; ++i) {
      if (!in_support(grid.point(i)) && std::abs(values[i]) > support_tol * scale)
        throw InvalidFieldError("field: value outside declared support at x=" +
                                std::to_string(grid.point(i)));
    }
  }
  if (parity == Parity::Odd && grid.symmetric()) {
    const double scale = std::max(max_abs(), 1e-300);
    for (int i = 1; i < grid.n; ++i) {
      // point(n-i) = -point(i) on a symmetric node grid
      if (std::abs(values[i] + values[grid.n - i]) > parity_tol * scale)
        throw InvalidFieldError("field: odd parity violated at x=" +
                                std::to_string(grid.point(i)));
    }
  }
}

SampledField make_field(const Grid& g, Parity parity) {
  SampledField f;
  f.grid = g;
  f.values.assign(g.n, 0.0);
  f.parity = parity;
  return f;
}

std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order) {
  const int n = static_cast<int>(f.size());
  std::vector<double> g(n, 0.0);
  auto at = [&](int i) { return (i < 0 || i >= n) ? 0.0 : f[i]; };
  switch (order) {
    case 0:
      return f;
    case 1:
      for (int i = 0; i < n; ++i)
        g[i] = (at(i - 2) - 8 * at(i - 1) + 8 * at(i + 1) - at(i + 2)) / (12 * h);
      break;
    case 2:
      for (int i = 0; i < n; ++i)
        g[i] = (-at(i - 2) + 16 * at(i - 1) - 30 * at(i) + 16 * at(i + 1) - at(i + 2)) /
               (12 * h * h);
      break;
    case 3:
      for (int i = 0; i < n; ++i)
        g[i] = (-at(i - 2) + 2 * at(i - 1) - 2 * at(i + 1) + at(i + 2)) / (2 * h * h * h);
      break;
    case 4:
      for (int i = 0; i < n; ++i)
        g[i] = (at(i - 2) - 4 * at(i - 1) + 6 * at(i) - 4 * at(i + 1) + at(i + 2)) /
               (h * h * h * h);
      break;
    default:
      throw UnsupportedOrderError("fd_derivative: order must be 0..4, got " +
                                  std::to_string(order));
  }
  return g;
}

double integrate(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * h;
}

double l2_norm(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s * h);
}

}  // namespace emhd
