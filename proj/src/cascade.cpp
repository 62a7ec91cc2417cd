#include "emhd/cascade.hpp"

#include <algorithm>
#include <cmath>

namespace emhd {

CascadeState initial_cascade_state(const CascadeParams& p, double coupling) {
  CascadeState s;
  s.t = 0.0;
  s.x.resize(p.n + 1);
  s.a.assign(p.n + 1, coupling);
  for (int k = 0; k <= p.n; ++k) s.x[k] = std::pow(p.A, k);
  return s;
}

double solve_root(double A) {
  if (!(A > 1.0))
    throw ConfigError("solve_root: requires A > 1 (for A <= 1 only the trivial root a = 0 "
                      "is nonnegative); got A=" + std::to_string(A));
  auto g = [A](double a) { return A * (1.0 - std::exp(-a)) - a; };
  double lo = 1e-9, hi = 2.0 * A;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  // Newton polish
  for (int it = 0; it < 4; ++it) {
    const double gp = A * std::exp(-a) - 1.0;
    if (gp == 0.0) break;
    a -= g(a) / gp;
  }
  return a;
}

namespace {

void cascade_rhs(const std::vector<double>& x, const std::vector<double>& a, double bfac,
                 std::vector<double>& out) {
  const int m = static_cast<int>(x.size());
  out.resize(m);
  double csum = 0.0;
  for (int k = 0; k < m; ++k) {
    out[k] = bfac * x[k] * csum;
    csum += a[k] * x[k];
  }
}

std::vector<double> rk4_once(const std::vector<double>& x, const std::vector<double>& a,
                             double bfac, double dt) {
  const int m = static_cast<int>(x.size());
  std::vector<double> k1, k2, k3, k4, tmp(m);
  cascade_rhs(x, a, bfac, k1);
  for (int i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  cascade_rhs(tmp, a, bfac, k2);
  for (int i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  cascade_rhs(tmp, a, bfac, k3);
  for (int i = 0; i < m; ++i) tmp[i] = x[i] + dt * k3[i];
  cascade_rhs(tmp, a, bfac, k4);
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i)
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace

CascadeState step_cascade(const CascadeState& state, const CascadeParams& params,
                          double dt, const std::vector<double>& couplings,
                          bool include_b) {
  if (dt == 0.0) throw ConfigError("step_cascade: dt must be nonzero");
  for (double c : couplings)
    if (!std::isfinite(c)) throw InvalidFieldError("step_cascade: non-finite coupling");
  const double bfac = include_b ? params.b : 1.0;

  double step = dt;
  const double t_target = state.t + dt;
  const double done_tol = 1e-14 * std::max(1.0, std::abs(t_target));
  CascadeState cur = state;
  cur.a = couplings;
  long iters = 0;
  while (std::abs(t_target - cur.t) > done_tol) {
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(cur.t)) || ++iters > 500000)
      throw StiffnessError("step_cascade: step underflow at t=" + std::to_string(cur.t));
    if ((dt > 0) ? cur.t + step > t_target : cur.t + step < t_target)
      step = t_target - cur.t;
    // step-doubling local error estimate
    const std::vector<double> full = rk4_once(cur.x, couplings, bfac, step);
    std::vector<double> half = rk4_once(cur.x, couplings, bfac, 0.5 * step);
    half = rk4_once(half, couplings, bfac, 0.5 * step);
    bool ok = true;
    double err = 0.0;
    for (size_t i = 0; i < full.size(); ++i) {
      if (!(half[i] > 0.0) || !std::isfinite(half[i])) { ok = false; break; }
      err = std::max(err, std::abs(full[i] - half[i]) / half[i]);
    }
    if (!ok || err > 1e-3) {
      step *= 0.5;
      continue;
    }
    cur.x = half;
    cur.t += step;
  }
  cur.t = t_target;
  return cur;
}

CascadeTrajectory integrate_cascade(const CascadeParams& params, const CascadeState& from,
                                    double t_end, double coupling, int per_decade,
                                    double t_store_min, bool include_b) {
  params.validate();
  CascadeTrajectory traj;
  traj.params = params;
  std::vector<double> coup(params.n + 1, coupling);

  CascadeState cur = from;
  cur.a = coup;
  const bool backward = t_end < cur.t;
  traj.states.push_back(cur);

  const double bfac = include_b ? params.b : 1.0;
  double next_store = t_store_min;
  const double grow = std::pow(10.0, 1.0 / per_decade);
  while (backward ? cur.t > t_end : cur.t < t_end) {
    // rate-limited step: |dlog x| <= 0.05 per step keeps RK4 in its sweet spot
    std::vector<double> rhs;
    cascade_rhs(cur.x, coup, bfac, rhs);
    double rate = 0.0;
    for (size_t i = 0; i < rhs.size(); ++i) rate = std::max(rate, std::abs(rhs[i]) / cur.x[i]);
    double step = (rate > 0) ? 0.03 / rate : std::abs(t_end - cur.t);
    step = std::min(step, std::abs(t_end - cur.t));
    // do not overshoot the next checkpoint magnitude
    if (std::abs(cur.t) >= t_store_min * 0.5)
      step = std::min(step, std::max(0.25 * std::abs(cur.t), t_store_min * 0.25));
    cur = step_cascade(cur, params, backward ? -step : step, coup, include_b);
    if (std::abs(cur.t) >= next_store) {
      traj.states.push_back(cur);
      while (next_store <= std::abs(cur.t)) next_store *= grow;
    }
  }
  if (traj.states.empty() || traj.states.back().t != cur.t) traj.states.push_back(cur);
  if (backward) std::reverse(traj.states.begin(), traj.states.end());
  return traj;
}

IntegralBoundReport verify_integral_bound(const CascadeTrajectory& traj,
                                          const CascadeParams& params) {
  IntegralBoundReport rep;
  rep.a_root = solve_root(params.A);
  const int n = params.n;

  // couplings over the window
  rep.delta_min = 1e300;
  rep.delta_max = -1e300;
  for (const auto& s : traj.states) {
    for (double a : s.a) {
      rep.delta_min = std::min(rep.delta_min, a);
      rep.delta_max = std::max(rep.delta_max, a);
    }
  }

  // trapezoid of x_n over [-a, 0] on the stored trajectory
  double t_lo = 1e300, t_hi = -1e300;
  for (const auto& s : traj.states) {
    t_lo = std::min(t_lo, s.t);
    t_hi = std::max(t_hi, s.t);
  }
  if (t_lo > -rep.a_root + 1e-12 || t_hi < 0.0)
    throw CoverageError("verify_integral_bound: trajectory does not cover [-a, 0], a=" +
                        std::to_string(rep.a_root));

  double integral = 0.0;
  for (size_t i = 0; i + 1 < traj.states.size(); ++i) {
    const auto& s0 = traj.states[i];
    const auto& s1 = traj.states[i + 1];
    double a0 = s0.t, a1 = s1.t;
    double f0 = s0.x[n], f1 = s1.x[n];
    if (a1 <= -rep.a_root || a0 >= 0.0) continue;
    if (a0 < -rep.a_root) {
      // clip at -a with linear interpolation
      const double w = (-rep.a_root - a0) / (a1 - a0);
      f0 = f0 + w * (f1 - f0);
      a0 = -rep.a_root;
    }
    integral += 0.5 * (f0 + f1) * (a1 - a0);
  }
  rep.integral = integral;
  rep.upper_bound = rep.a_root / rep.delta_min;
  rep.lower_bound = rep.a_root / rep.delta_max;
  rep.pass_upper = integral <= rep.upper_bound * (1.0 + rep.rel_tol);
  rep.pass_lower = integral >= rep.lower_bound * (1.0 - rep.rel_tol);
  return rep;
}

RatioMonotonicityReport ratio_monotonicity(const CascadeTrajectory& traj) {
  RatioMonotonicityReport rep;
  const auto& states = traj.states;
  if (states.size() < 2) return rep;
  const int m = static_cast<int>(states.front().x.size());
  for (size_t i = 0; i + 1 < states.size(); ++i) {
    const auto& s0 = states[i];
    const auto& s1 = states[i + 1];  // later time
    for (int hi = 1; hi < m; ++hi) {
      for (int lo = 0; lo < hi; ++lo) {
        const double q0 = s0.x[hi] / s0.x[lo];
        const double q1 = s1.x[hi] / s1.x[lo];
        const double viol = (q1 - q0) / std::max(q0, 1e-300);
        if (viol < rep.worst_violation) {
          rep.worst_violation = viol;
          rep.worst_pair_hi = hi;
          rep.worst_pair_lo = lo;
        }
      }
    }
  }
  rep.pass = rep.worst_violation >= -rep.tol;
  return rep;
}

}  // namespace emhd
