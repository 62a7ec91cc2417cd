#pragma once

#include <array>
#include <vector>

#include "emhd/cascade.hpp"
#include "emhd/grid.hpp"
#include "emhd/params.hpp"
#include "emhd/seed.hpp"

namespace emhd {

// The full multi-scale solution: per-bubble profiles W_k on a shared
// reference grid plus the scaling-factor state. Bubble k lives at physical
// scale lambda_k = x_k (r/A)^k via
//   B_k(x,t) = x_k^c (r/A)^{d k} W_k(x / lambda_k, t).
struct BubbleAtlas {
  ModelParams params;
  CascadeState cascade;
  std::vector<SampledField> profiles;

  int n() const { return params.n; }
  double ratio() const { return params.r / params.A; }
  double lambda(int k) const { return cascade.x[k] * std::pow(ratio(), k); }
  // d^m B_k prefactor: x_k^{c-m} (r/A)^{(d-m)k}
  double prefactor(int k, int m) const {
    return std::pow(cascade.x[k], params.exponents.c - m) *
           std::pow(ratio(), (params.exponents.d - m) * k);
  }

  const Grid& ref_grid() const { return profiles.front().grid; }

  // Indices of the active bands |xi| in [1-2r-margin, 1+2r+margin].
  std::vector<int> active_indices() const;
  // Source samples for quadratures: the same bands (profiles vanish outside).
  void active_ranges(int& neg_lo, int& neg_hi, int& pos_lo, int& pos_hi) const;

  void validate() const;
};

// Atlas at t = 0: every profile equals the seed, x_k = A^k; the identity
// B_k(x,0) = r^{3k} A^k phi(x/r^k) is verified on a sample set.
BubbleAtlas initial_atlas(const ModelParams& params, const SeedProfile& seed);

// a_j(t) = H d^2 W_j(0,t), far-field kernel (0 is outside every support).
std::vector<double> coupling_coefficients(const BubbleAtlas& atlas);

enum class InteractionSign { All, BelowK, AboveK };

// d^N H B_sel evaluated at the physical points of bubble k's reference grid,
// computed bubble-by-bubble via the scaling identity
//   d^N H B_j(x) = x_j^{c-N} (r/A)^{(d-N)j} (d^N H W_j)(x / lambda_j);
// the j = k term takes the principal-value path. Values are populated on
// the active bands (the rest of the grid carries no profile mass).
SampledField interaction_field(const BubbleAtlas& atlas, int k, int N,
                               InteractionSign sign);

// Sum of per-bubble contributions of d^m B at arbitrary points (cubic
// interpolation between profile nodes); exact zero outside all supports.
std::vector<double> evaluate(const BubbleAtlas& atlas, const std::vector<double>& points,
                             int m);

// max |d^3 B| via the prefactor collapse sup_k x_k^{c-3} (r/A)^{(d-3)k} max|d^3 W_k|.
struct PeakInfo {
  double value = 0.0;     // max |d^3 B|
  int k = 0;              // maximizing bubble
  double x_peak = 0.0;    // physical location of the peak
};
PeakInfo max_d3(const BubbleAtlas& atlas);

struct SobolevResult {
  double value = 0.0;
  double tail_ratio = 0.0;        // analytic geometric ratio A r^{3.5-m} at t=0 scaling
  bool divergence_warning = false;  // tail ratio >= 1 (expected near m = 3.5)
  double convergent_m_max = 0.0;    // 3.5 - ln A / ln(1/r)
};

// (sum_k ||d^m B_k||_L2^2)^{1/2} per bubble in profile coordinates;
// fractional m via |xi|^m spectral weights on the zero-padded reference grid.
SobolevResult sobolev_norm(const BubbleAtlas& atlas, double m);

// L2 norm (over a union-of-supports sample grid) of
// (B_after - B_before)/dt + 2 b J dB - b H d^2 B . B at the midpoint atlas,
// normalized by the largest term. J = -H(dB).
double model_residual(const BubbleAtlas& before, const BubbleAtlas& after, double dt,
                      const ModelParams& params);

struct TailReport {
  int window_N = 0;                   // windows [1/N, 1] and [-1, -1/N]
  std::vector<int> truncations;       // n' values
  std::vector<double> cN_distance;    // sup-window C^N distance between B_n and B_{n'}
  double h3_tail_ratio_measured = 0.0;  // consecutive ||B_k||_{H3} ratio (mean)
  double h3_tail_ratio_expected = 0.0;  // A r^{0.5} * (x-drift factors)
  std::vector<double> hm_tail;        // sum_{j>k} ||B_j||_{Hm*} vs k
  double m_star = 0.0;                // largest convergent half-step order
  bool geometric_decay = false;
};

TailReport tail_report(const BubbleAtlas& atlas, int window_N);

}  // namespace emhd
