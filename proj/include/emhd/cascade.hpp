#pragma once

#include <functional>
#include <vector>

#include "emhd/params.hpp"

namespace emhd {

// State of the scaling-factor system: x_k(t) and the cached coupling
// coefficients a_j(t).
struct CascadeState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> a;

  int n() const { return static_cast<int>(x.size()) - 1; }
};

// Initial state x_k(0) = A^k with constant couplings.
CascadeState initial_cascade_state(const CascadeParams& p, double coupling);

// Unique positive root of a = A(1 - e^{-a}) for A > 1, residual <= 1e-12.
// The root satisfies ln A < a < 2(A-1).
double solve_root(double A);

// One RK4 step of xdot_k = b? * x_k * sum_{j<k} a_j x_j (triangular system).
// The step is rejected and halved if positivity or the 1e-3 relative
// local-error estimate fails; dt underflow raises StiffnessError.
CascadeState step_cascade(const CascadeState& state, const CascadeParams& params,
                          double dt, const std::vector<double>& couplings,
                          bool include_b = true);

// Trajectory with log-uniform-in-|t| checkpoints.
struct CascadeTrajectory {
  std::vector<CascadeState> states;  // ordered by increasing t (most negative first)
  CascadeParams params;
};

// Integrate backward (t_end < 0) or forward from `from`, storing checkpoints
// log-uniformly in |t| at `per_decade` density. Couplings are constant here;
// the coupled PDE driver refreshes them per macro step instead.
CascadeTrajectory integrate_cascade(const CascadeParams& params, const CascadeState& from,
                                    double t_end, double coupling, int per_decade = 200,
                                    double t_store_min = 1e-12, bool include_b = true);

struct IntegralBoundReport {
  double a_root = 0.0;
  double integral = 0.0;     // trapezoid of x_n over [-a, 0]
  double upper_bound = 0.0;  // a / delta_min
  double lower_bound = 0.0;  // a / delta_max (reversed inequality)
  double delta_min = 0.0;
  double delta_max = 0.0;
  double rel_tol = 1e-3;     // trapezoid slack; the delta_min = delta_max case is exactly tight
  bool pass_upper = false;
  bool pass_lower = false;
  bool pass() const { return pass_upper && pass_lower; }
};

// Checks int_{-a}^0 x_n dt <= a/delta_min and the reversed bound
// >= a/delta_max over the stored trajectory.
IntegralBoundReport verify_integral_bound(const CascadeTrajectory& traj,
                                          const CascadeParams& params);

struct RatioMonotonicityReport {
  double worst_violation = 0.0;  // most negative relative decrement seen
  int worst_pair_hi = -1;
  int worst_pair_lo = -1;
  double tol = 1e-10;
  bool pass = true;
};

// Lemma: for n' > k', the ratio x_{n'}/x_{k'} increases in t.
RatioMonotonicityReport ratio_monotonicity(const CascadeTrajectory& traj);

}  // namespace emhd
