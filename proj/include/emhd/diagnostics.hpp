#pragma once

#include <string>
#include <vector>

#include "emhd/atlas.hpp"
#include "emhd/cascade.hpp"

namespace emhd {

// Atlas with frozen seed profiles at a given cascade state; carrier for
// ODE-level diagnostics (rate fit, Hoelder, rescaling probe).
BubbleAtlas atlas_from_cascade(const ModelParams& params, const SeedProfile& seed,
                               const CascadeState& state);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double band_ratio = 0.0;  // max(M|t|)/min(M|t|) over the window
  double t_abs_lo = 0.0, t_abs_hi = 0.0;
  int points = 0;
};

// Least-squares fit of log M vs log |t| over |t| in [t_abs_lo, t_abs_hi].
RateFit blowup_rate_fit(const std::vector<std::pair<double, double>>& t_and_M,
                        double t_abs_lo, double t_abs_hi);

// M(t) = sup_k x_k(t) * max|d^3 W| from an ODE trajectory with frozen profiles.
std::vector<std::pair<double, double>> rate_series(const CascadeTrajectory& traj,
                                                   double max_d3_seed);

struct HolderEstimate {
  double s_measured = 0.0;   // adjacent-peak pair slope
  double s_predicted = 0.0;  // (a - ln A)/(a - ln r), clamped to 1/2 and flagged
  bool s_clamped = false;
  int pair_count = 0;
  double max_quotient = 0.0;     // max |dB3|/dist^{s_pred} over all pairs
  double min_implied_s = 0.0;    // min over pairs of (log D - intercept)/log dist
  bool precision_warning = false;  // fewer than 10 resolved bubbles
};

// Peak-to-peak pairs across adjacent saturated bubbles (the binding pairs)
// plus seeded random within-bubble pairs.
HolderEstimate holder_estimate(const BubbleAtlas& atlas, unsigned seed = 2024,
                               int random_pairs = 64);

struct FeasibilityRow {
  double c = 0.0;
  double cw_inv = 0.0;    // limit of C_w^{-1}: -(2c+1)
  double cl_m2 = 0.0;     // implied C_l^{-2} = -1/(2c+1)
  bool feasible = false;  // squared length scale must be positive
};

// Dynamic-rescaling constraints: C_w^{-1} C_l^{-2} -> 1 and
// C_w^{-1} -> -(2c+1) force C_l^{-2} = -1/(2c+1) < 0 for every c > -1/2.
std::vector<FeasibilityRow> selfsim_feasibility(const std::vector<double>& c_values);

struct ProbeResult {
  double min_distance = 0.0;
  double max_distance = 0.0;
  int snapshots = 0;
  double weight_power = 1.0;
  std::vector<double> grid;                     // common rescaled grid
  std::vector<std::vector<double>> profiles;    // normalized rescaled snapshots
};

// Rescales each snapshot by measured scales (amplitude 1/(max|d3B| l^3),
// length l = maximizing-peak location), normalizes in weighted L2 with
// weight (1+x^2)^{-p}, and returns the min pairwise distance.
ProbeResult selfsim_probe(const std::vector<BubbleAtlas>& snapshots,
                          double weight_power = 1.0, double grid_halfwidth = 40.0,
                          int grid_points = 4001);

// Same probe on closures (x, t) -> u for synthetic controls.
ProbeResult selfsim_probe_fn(const std::vector<double>& times,
                             const std::function<double(double, double)>& u,
                             const std::function<double(double)>& length_scale,
                             const std::function<double(double)>& amp_scale,
                             double weight_power = 1.0, double grid_halfwidth = 40.0,
                             int grid_points = 4001);

}  // namespace emhd
