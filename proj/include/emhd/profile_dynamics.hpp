#pragma once

#include <array>
#include <vector>

#include "emhd/atlas.hpp"

namespace emhd {

// Transport/stretching coefficients and time derivatives of the coupled
// (x_k, W_k) system at one atlas state. Couplings are the frozen a_j of the
// enclosing macro step.
struct CoupledRhs {
  std::vector<double> xdot;
  std::vector<std::vector<double>> wdot;  // per bubble, full reference grid
  double max_u = 0.0;                     // max transport speed over all bubbles
  double max_sigma = 0.0;                 // max |stretching coefficient|
};

CoupledRhs coupled_rhs(const BubbleAtlas& atlas, const std::vector<double>& couplings);

// Right-hand side of bubble k's profile evolution:
//   u_k dW + (b d2HB_n(phys) - c xdot/x) W,
//   u_k = 2b x_k^{-1} (A/r)^k dHB_n(phys) + xi xdot/x.
SampledField profile_rhs(const SampledField& W_k, const BubbleAtlas& atlas, int k,
                         const ModelParams& params);

struct StepResult {
  BubbleAtlas atlas;
  bool support_escape = false;  // bootstrap-violation signal, recorded not thrown
  double max_u = 0.0;
  double max_sigma = 0.0;
};

// One method-of-lines RK4 step of every W_k (5-point centered differences)
// together with the scaling factors. Couplings are frozen across substeps.
// Violating the advective CFL max|u| |dt| <= 0.5 h raises StepSizeError.
StepResult step_profiles(const BubbleAtlas& atlas, const ModelParams& params, double dt);

// Largest dt honoring both the advective CFL and the dispersive stability
// bound of the H d^2 self-term.
double recommended_dt(const BubbleAtlas& atlas);

struct SupportReport {
  std::vector<double> displacement;  // per bubble, max endpoint displacement (xi units)
  double max_displacement = 0.0;
  double bound = 0.0;  // r
  bool pass = false;
};

// Accumulates endpoint motion under the transport speed across a run.
class SupportTracker {
 public:
  explicit SupportTracker(const BubbleAtlas& atlas);
  // Advance endpoint positions by one macro step using the step's coefficients.
  void observe(const BubbleAtlas& atlas, const CoupledRhs& rhs, double dt);
  SupportReport report(double r) const;

 private:
  std::vector<std::array<double, 4>> pos_;   // per bubble: -hi,-lo,+lo,+hi endpoints
  std::vector<std::array<double, 4>> pos0_;
};

struct BootstrapReport {
  std::vector<double> h4_distance;  // per bubble ||W_k - phi||_{Hdot4}
  double max_h4 = 0.0;
  bool h4_ok = false;
  bool support_ok = false;          // mass confined to the bootstrap windows
  std::vector<double> l1_distance;
  double l1_bound = 0.0;            // 512 r^4 sqrt(2r) eps (the proof-chain constant 2^9 coincides)
  bool l1_ok = false;
  bool pass() const { return h4_ok && support_ok && l1_ok; }
};

BootstrapReport bootstrap_monitor(const BubbleAtlas& atlas, const SeedProfile& seed,
                                  double epsilon);

struct EnergyTerms {
  std::array<double, 8> E{};
  double h4 = 0.0;       // ||W_k - phi||_{Hdot4}
  // |E_i| <= C_i * basis_i with basis = h4^2 for i in {1,3,5,7}, h4 otherwise
  double basis(int i) const { return (i % 2 == 0) ? h4 * h4 : h4; }  // i is 0-based
};

// E_1..E_8 with all d^8 factors moved to d^4 . d^4 by parts
// (boundary terms vanish on compact support).
EnergyTerms energy_terms(const SampledField& W_k, const SeedProfile& seed,
                         const BubbleAtlas& atlas, int k, const ModelParams& params);

// Pure scaling flow dW/dt = rho (xi dW - c W): relative residual between the
// one-step finite difference of ||W||^2_{HdotN} and the rate 2 rho (N - 1/2 - c).
double energy_identity_check(const SampledField& W, int N, double rho, double c,
                             double dt);

struct MonitorRow {
  double t = 0.0;
  double max_h4 = 0.0;
  double sqrtE_over_t = 0.0;
  std::array<double, 8> Ei_ratio{};  // max over k of |E_i| / basis_i
};

struct CoupledRunResult {
  double T_discovered = 0.0;
  bool bootstrap_held = false;
  double K_fit = 0.0;                  // max sqrt(E) / |t|
  double K_spread = 0.0;               // max/min of sqrt(E)/|t| over the fit window
  std::array<double, 8> ratio_spread{};  // per E_i: max/min across the run
  bool ratios_stable = false;          // all spreads <= 2
  SupportReport support;
  std::vector<MonitorRow> series;
  BubbleAtlas final_atlas;
  BootstrapReport final_bootstrap;
};

struct RunControl {
  int steps = 32;              // macro steps over the verified window
  int bisect_iters = 8;
  double probe_dt = 1e-12;
  int max_doublings = 60;
};

// Discovers the largest T (by bisection) with ||W_k - phi||_{Hdot4} <= eps on
// [-T, 0] for all k, then re-runs the verified window with monitors on.
CoupledRunResult run_coupled(const ModelParams& params, const SeedProfile& seed,
                             const RunControl& control = {});

}  // namespace emhd
