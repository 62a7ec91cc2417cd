#pragma once

#include <utility>
#include <vector>

#include "emhd/grid.hpp"

namespace emhd {

// Hilbert transform machinery under the convention
//   Hf(x) = (1/pi) p.v. int f(y)/(x-y) dy,
// so H cos = sin, H sin = -cos, and H(Hf) = -(f - mean f).

// Spectral Hilbert transform on a periodic power-of-two grid via the
// Fourier multiplier -i sgn(xi). Zero mode (and Nyquist) map to zero.
SampledField hilbert_periodic(const SampledField& f);

// Discrete principal-value Hilbert transform at grid nodes: symmetric-pair
// trapezoid over the 2h-subgrid of opposite-parity nodes, singular node
// excluded. Exact for band-limited interpolants, O(h^2) worst case.
// Evaluates H[f] at the node indices in `targets`.
std::vector<double> pv_hilbert_at_nodes(const std::vector<double>& f, const Grid& g,
                                        const std::vector<int>& targets);

// All nodes at once.
std::vector<double> pv_hilbert(const std::vector<double>& f, const Grid& g);

// Far-field kernel: d^N(Hf)(x) = ((-1)^N N!/pi) int f(y)/(x-y)^{N+1} dy
// as a plain weighted sum over the samples in [src_lo, src_hi).
// Requires every target to be outside the source range.
std::vector<double> farfield_dNH(const std::vector<double>& f, const Grid& g,
                                 int src_lo, int src_hi,
                                 const std::vector<double>& targets, int N);

struct HilbertPointResult {
  double value = 0.0;
  bool endpoint_warning = false;  // x fell on a support endpoint; Richardson fallback used
};

// d^N(Hf)(x) for a compactly supported sampled field, N = 0..5.
// Outside the support (by at least one grid spacing) the regular kernel
// quadrature is used; inside, derivatives are moved onto f by N
// integrations by parts and the principal-value path is taken.
HilbertPointResult hilbert_derivative_at_ex(const SampledField& f, double x, int N);
double hilbert_derivative_at(const SampledField& f, double x, int N);

}  // namespace emhd
