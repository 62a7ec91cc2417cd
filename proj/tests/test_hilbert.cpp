#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emhd/hilbert.hpp"
#include "emhd/seed.hpp"

using namespace emhd;

namespace {
constexpr double kPi = 3.14159265358979323846;

SampledField periodic(int n, double L, double (*f)(double)) {
  Grid g{-L / 2, L / 2, n};
  SampledField out = make_field(g);
  for (int i = 0; i < n; ++i) out.values[i] = f(g.point(i));
  return out;
}
}  // namespace

TEST_CASE("hilbert_periodic: zero maps to zero") {
  Grid g{0.0, 2 * kPi, 256};
  SampledField z = make_field(g);
  auto Hz = hilbert_periodic(z);
  for (double v : Hz.values) CHECK(v == 0.0);
}

TEST_CASE("hilbert_periodic: cos -> sin and sin -> -cos at 256 points") {
  const int n = 256;
  Grid g{0.0, 2 * kPi, n};
  SampledField c = make_field(g), s = make_field(g);
  for (int i = 0; i < n; ++i) {
    c.values[i] = std::cos(g.point(i));
    s.values[i] = std::sin(g.point(i));
  }
  auto Hc = hilbert_periodic(c);
  auto Hs = hilbert_periodic(s);
  double e1 = 0, e2 = 0;
  for (int i = 0; i < n; ++i) {
    e1 = std::max(e1, std::abs(Hc.values[i] - std::sin(g.point(i))));
    e2 = std::max(e2, std::abs(Hs.values[i] + std::cos(g.point(i))));
  }
  CHECK(e1 <= 1e-10);
  CHECK(e2 <= 1e-10);
}

TEST_CASE("hilbert_periodic: anti-involution and parity flip") {
  const int n = 512;
  Grid g{-kPi, kPi, n};
  SampledField f = make_field(g, Parity::Even);
  for (int i = 0; i < n; ++i) {
    const double x = g.point(i);
    f.values[i] = std::cos(3 * x) + 0.25 * std::cos(11 * x);
  }
  auto Hf = hilbert_periodic(f);
  CHECK(Hf.parity == Parity::Odd);
  // odd result on the symmetric grid
  Hf.validate();
  auto HHf = hilbert_periodic(Hf);
  double e = 0;
  for (int i = 0; i < n; ++i) e = std::max(e, std::abs(HHf.values[i] + f.values[i]));
  CHECK(e <= 1e-8);
}

TEST_CASE("hilbert_periodic rejects bad input") {
  Grid g{0.0, 1.0, 200};  // not a power of two
  SampledField f = make_field(g);
  CHECK_THROWS_AS(hilbert_periodic(f), ConfigError);
  Grid g2{0.0, 1.0, 256};
  SampledField f2 = make_field(g2);
  f2.values[3] = std::nan("");
  CHECK_THROWS_AS(hilbert_periodic(f2), InvalidFieldError);
}

TEST_CASE("hilbert_derivative_at: zero field") {
  Grid g{-2.0, 2.0, 256};
  SampledField z = make_field(g);
  z.support = {{-1.0, 1.0}};
  for (int N = 0; N <= 5; ++N) CHECK(hilbert_derivative_at(z, 0.5, N) == 0.0);
  CHECK_THROWS_AS(hilbert_derivative_at(z, 0.5, 6), UnsupportedOrderError);
}

TEST_CASE("far-field point mass: d2(H)(0) of unit mass at 1 is -2/pi") {
  const double w = 1e-3;
  Grid g{1.0 - 8 * w, 1.0 + 8 * w, 4096};
  SampledField bump = make_field(g);
  for (int i = 0; i < g.n; ++i) {
    const double y = g.point(i);
    bump.values[i] = std::exp(-(y - 1) * (y - 1) / (2 * w * w)) / (w * std::sqrt(2 * kPi));
  }
  bump.support = {{g.x_min, g.x_max}};
  const double v = hilbert_derivative_at(bump, 0.0, 2);
  CHECK(v == doctest::Approx(-2.0 / kPi).epsilon(1e-3));
}

TEST_CASE("truncated Lorentzian: H f(3) = 3/10 within 1e-3") {
  Grid g{-50.0, 50.0, 20000};
  SampledField f = make_field(g);
  for (int i = 0; i < g.n; ++i) f.values[i] = 1.0 / (1.0 + g.point(i) * g.point(i));
  f.support = {{-50.0, 50.0}};
  const double v = hilbert_derivative_at(f, 3.0, 0);
  CHECK(std::abs(v - 0.3) <= 1e-3);
}

TEST_CASE("pv path: H of even bump is odd; antisymmetry to 1e-8") {
  Grid g{-1.0, 1.0, 1024};
  SampledField f = make_field(g);
  const double r = 0.3;
  for (int i = 0; i < g.n; ++i) {
    const double x = g.point(i);
    f.values[i] = std::abs(x) < r ? std::exp(-x * x / (r * r - x * x)) : 0.0;
  }
  f.support = {{-r, r}};
  // H(even) is odd: compare +-x node values
  std::vector<double> Hf = pv_hilbert(f.values, g);
  double e = 0, scale = 0;
  for (int i = 1; i < g.n; ++i) {
    e = std::max(e, std::abs(Hf[i] + Hf[g.n - i]));
    scale = std::max(scale, std::abs(Hf[i]));
  }
  CHECK(e / scale <= 1e-8);
}

TEST_CASE("pv path converges at 2nd order or better on a smooth bump") {
  // reference from a fine grid
  const double r = 0.3;
  auto make = [&](int n) {
    Grid g{-0.5, 0.5, n};
    SampledField f = make_field(g);
    for (int i = 0; i < g.n; ++i) {
      const double x = g.point(i);
      f.values[i] = std::abs(x) < r ? std::exp(-x * x / (r * r - x * x)) : 0.0;
    }
    f.support = {{-r, r}};
    return f;
  };
  SampledField fine = make(1 << 14);
  const double ref = hilbert_derivative_at(fine, 0.1015625, 0);  // a node of all grids
  double prev_err = -1.0;
  for (int n : {128, 256, 512}) {
    SampledField f = make(n);
    const double v = hilbert_derivative_at(f, 0.1015625, 0);
    const double err = std::abs(v - ref);
    if (prev_err > 1e-14 && err > 1e-14) {
      const double order = std::log2(prev_err / err);
      CHECK(order >= 1.9);
    }
    prev_err = err;
  }
}

TEST_CASE("far-field decay bound: |dN H f| <= (N!/pi) ||f||_1 / dist^{N+1}") {
  const double r = 0.05;
  SeedProfile seed = make_seed_profile(r, 2048);
  double l1 = 0;
  for (double v : seed.field.values) l1 += std::abs(v);
  l1 *= seed.field.grid.h();
  const double fact[6] = {1, 1, 2, 6, 24, 120};
  for (int N = 0; N <= 5; ++N) {
    for (double x : {2.0, 3.0, 5.0}) {
      const double v = std::abs(hilbert_derivative_at(seed.field, x, N));
      const double dist = x - (1.0 + 2 * r);
      const double bound = fact[N] / kPi * l1 / std::pow(dist, N + 1);
      CHECK(v <= bound * 1.0001);
    }
  }
}

TEST_CASE("endpoint evaluation warns and falls back to Richardson") {
  const double r = 0.05;
  SeedProfile seed = make_seed_profile(r, 1024);
  auto res = hilbert_derivative_at_ex(seed.field, 1.0 + r, 1);  // support endpoint
  CHECK(res.endpoint_warning);
  CHECK(std::isfinite(res.value));
}
