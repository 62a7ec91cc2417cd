#include "emhd/hilbert.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

namespace emhd {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kFactorial[6] = {1, 1, 2, 6, 24, 120};
std::mutex fftw_plan_mutex;  // FFTW planning is not thread-safe
}  // namespace

SampledField hilbert_periodic(const SampledField& f) {
  if (!f.grid.power_of_two())
    throw ConfigError("hilbert_periodic: grid must have a power-of-two point count >= 8");
  for (double v : f.values)
    if (!std::isfinite(v)) throw InvalidFieldError("hilbert_periodic: NaN/Inf in input");

  const int n = f.grid.n;
  std::vector<std::complex<double>> spec(n / 2 + 1);
  std::vector<double> in(f.values);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(n, in.data(),
                                         reinterpret_cast<fftw_complex*>(spec.data()),
                                         FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
  }
  // multiplier -i sgn(xi); zero mode and Nyquist annihilated
  spec[0] = 0.0;
  for (int k = 1; k < n / 2; ++k) spec[k] *= std::complex<double>(0.0, -1.0);
  spec[n / 2] = 0.0;

  SampledField out = f;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec.data()),
                                         out.values.data(), FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);
  }
  for (double& v : out.values) v /= n;
  if (f.parity == Parity::Odd) out.parity = Parity::Even;
  else if (f.parity == Parity::Even) out.parity = Parity::Odd;
  out.support.clear();  // Hf is not compactly supported
  return out;
}

std::vector<double> pv_hilbert_at_nodes(const std::vector<double>& f, const Grid& g,
                                        const std::vector<int>& targets) {
  const int n = g.n;
  const double h = g.h();
  std::vector<double> out(targets.size(), 0.0);
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    const int i = targets[ti];
    double s = 0.0;
    // opposite-parity nodes only; pair weight 2h
    for (int j = (i % 2 == 0) ? 1 : 0; j < n; j += 2) {
      s += f[j] / (i - j);
    }
    out[ti] = s * (2.0 / kPi);  // 2h/(pi*(i-j)*h) = 2/(pi*(i-j))
  }
  return out;
}

std::vector<double> pv_hilbert(const std::vector<double>& f, const Grid& g) {
  std::vector<int> all(g.n);
  for (int i = 0; i < g.n; ++i) all[i] = i;
  return pv_hilbert_at_nodes(f, g, all);
}

std::vector<double> farfield_dNH(const std::vector<double>& f, const Grid& g,
                                 int src_lo, int src_hi,
                                 const std::vector<double>& targets, int N) {
  if (N < 0 || N > 5)
    throw UnsupportedOrderError("farfield_dNH: N must be 0..5, got " + std::to_string(N));
  const double h = g.h();
  const double pref = ((N % 2 == 0) ? 1.0 : -1.0) * kFactorial[N] / kPi * h;
  std::vector<double> out(targets.size(), 0.0);
  for (size_t ti = 0; ti < targets.size(); ++ti) {
    const double x = targets[ti];
    double s = 0.0;
    for (int j = src_lo; j < src_hi; ++j) {
      if (f[j] == 0.0) continue;  // zero samples must not pair with a singular kernel
      const double d = x - g.point(j);
      double k = 1.0 / d;
      double p = k;
      for (int m = 0; m < N; ++m) p *= k;
      s += f[j] * p;
    }
    out[ti] = pref * s;
  }
  return out;
}

namespace {

// derivative of order N <= 5 (order 5 by composition)
std::vector<double> fd_n(const std::vector<double>& f, double h, int N) {
  if (N <= 4) return fd_derivative(f, h, N);
  return fd_derivative(fd_derivative(f, h, 4), h, N - 4);
}

double interp_cubic(const std::vector<double>& v, const Grid& g, double x) {
  // 4-point Lagrange on the uniform grid, zero extension outside.
  const double h = g.h();
  const double u = (x - g.x_min) / h;
  int i1 = static_cast<int>(std::floor(u));
  const double t = u - i1;
  auto at = [&](int i) { return (i < 0 || i >= g.n) ? 0.0 : v[i]; };
  const double fm1 = at(i1 - 1), f0 = at(i1), f1 = at(i1 + 1), f2 = at(i1 + 2);
  return fm1 * (-t * (t - 1) * (t - 2) / 6.0) + f0 * ((t * t - 1) * (t - 2) / 2.0) +
         f1 * (-t * (t + 1) * (t - 2) / 2.0) + f2 * (t * (t * t - 1) / 6.0);
}

}  // namespace

HilbertPointResult hilbert_derivative_at_ex(const SampledField& f, double x, int N) {
  if (N < 0 || N > 5)
    throw UnsupportedOrderError("hilbert_derivative_at: N must be 0..5, got " +
                                std::to_string(N));
  for (double v : f.values)
    if (!std::isfinite(v)) throw InvalidFieldError("hilbert_derivative_at: NaN/Inf in input");

  HilbertPointResult res;
  const Grid& g = f.grid;
  const double h = g.h();

  // Support endpoint: kernel quadrature is ill-conditioned there. Richardson
  // fallback from symmetric offsets.
  double ep_dist = 1e300;
  for (const auto& iv : f.support) {
    ep_dist = std::min(ep_dist, std::min(std::abs(x - iv.lo), std::abs(x - iv.hi)));
  }
  if (!f.support.empty() && ep_dist < 0.25 * h) {
    res.endpoint_warning = true;
    const double d1 = hilbert_derivative_at(f, x - h, N);
    const double d2 = hilbert_derivative_at(f, x + h, N);
    const double d1h = hilbert_derivative_at(f, x - 0.5 * h, N);
    const double d2h = hilbert_derivative_at(f, x + 0.5 * h, N);
    // second-order Richardson on the symmetric average
    res.value = (4.0 * 0.5 * (d1h + d2h) - 0.5 * (d1 + d2)) / 3.0;
    return res;
  }

  const double dist = f.support_distance(x);
  if (dist >= h) {
    // regular kernel path: plain weighted sum over the support samples
    int lo = g.n, hi = 0;
    if (f.support.empty()) {
      lo = 0;
      hi = g.n;
    } else {
      for (int i = 0; i < g.n; ++i) {
        if (f.in_support(g.point(i))) {
          lo = std::min(lo, i);
          hi = std::max(hi, i + 1);
        }
      }
      if (lo >= hi) return res;  // empty support: zero
    }
    std::vector<double> t{x};
    res.value = farfield_dNH(f.values, g, lo, hi, t, N)[0];
    return res;
  }

  // in-support principal-value path; off-node x handled by cubic
  // interpolation of nodal p.v. values
  const std::vector<double> fd = fd_n(f.values, h, N);
  const int i0 = g.nearest(x);
  if (std::abs(x - g.point(i0)) < 1e-9 * h) {
    std::vector<int> t{i0};
    res.value = pv_hilbert_at_nodes(fd, g, t)[0];
    return res;
  }
  std::vector<int> nodes;
  for (int i = i0 - 2; i <= i0 + 2; ++i)
    if (i >= 0 && i < g.n) nodes.push_back(i);
  const std::vector<double> vals = pv_hilbert_at_nodes(fd, g, nodes);
  // local cubic through the computed nodes
  Grid sub{g.point(nodes.front()), g.point(nodes.back()) + h,
           static_cast<int>(nodes.size())};
  res.value = interp_cubic(vals, sub, x);
  return res;
}

double hilbert_derivative_at(const SampledField& f, double x, int N) {
  return hilbert_derivative_at_ex(f, x, N).value;
}

}  // namespace emhd
