#include "emhd/profile_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "emhd/hilbert.hpp"
#include "emhd/spectral.hpp"

#include <complex>

namespace emhd {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<double> cascade_xdot(const BubbleAtlas& atlas,
                                 const std::vector<double>& couplings) {
  const int n = atlas.n();
  std::vector<double> xdot(n + 1, 0.0);
  const double bfac = atlas.params.include_b_in_ode ? atlas.params.b : 1.0;
  double csum = 0.0;
  for (int k = 0; k <= n; ++k) {
    xdot[k] = bfac * atlas.cascade.x[k] * csum;
    csum += couplings[k] * atlas.cascade.x[k];
  }
  return xdot;
}

}  // namespace

CoupledRhs coupled_rhs(const BubbleAtlas& atlas, const std::vector<double>& couplings) {
  const ModelParams& p = atlas.params;
  const Grid& g = atlas.ref_grid();
  const int n = atlas.n();
  const std::vector<int> act = atlas.active_indices();

  CoupledRhs out;
  out.xdot = cascade_xdot(atlas, couplings);
  out.wdot.assign(n + 1, std::vector<double>(g.n, 0.0));

  for (int k = 0; k <= n; ++k) {
    const SampledField dH = interaction_field(atlas, k, 1, InteractionSign::All);
    const SampledField d2H = interaction_field(atlas, k, 2, InteractionSign::All);
    const std::vector<double> dW = fd_derivative(atlas.profiles[k].values, g.h(), 1);
    const double rho = out.xdot[k] / atlas.cascade.x[k];
    const double coef = 2.0 * p.b / atlas.cascade.x[k] *
                        std::pow(p.A / p.r, k);
    for (int idx : act) {
      const double xi = g.point(idx);
      const double u = coef * dH.values[idx] + xi * rho;
      const double sig = p.b * d2H.values[idx] - p.exponents.c * rho;
      out.wdot[k][idx] = u * dW[idx] + sig * atlas.profiles[k].values[idx];
      out.max_u = std::max(out.max_u, std::abs(u));
      out.max_sigma = std::max(out.max_sigma, std::abs(sig));
    }
  }
  return out;
}

SampledField profile_rhs(const SampledField& W_k, const BubbleAtlas& atlas, int k,
                         const ModelParams& params) {
  BubbleAtlas tmp = atlas;
  tmp.params = params;
  tmp.profiles[k] = W_k;
  if (!(tmp.cascade.x[k] > 0.0))
    throw CascadeDegeneracyError("profile_rhs: x_k must be positive");
  const CoupledRhs rhs = coupled_rhs(tmp, tmp.cascade.a);
  SampledField out = make_field(atlas.ref_grid());
  out.values = rhs.wdot[k];
  return out;
}

double recommended_dt(const BubbleAtlas& atlas) {
  const ModelParams& p = atlas.params;
  const Grid& g = atlas.ref_grid();
  // dispersive bound of the self-stretching term b x^{c-2} (r/A)^{(d-2)k} H d2(.) W
  double mult = 0.0;
  double wmax = 0.0;
  for (int k = 0; k <= atlas.n(); ++k) {
    mult = std::max(mult, std::abs(p.b) * atlas.prefactor(k, 2));
    wmax = std::max(wmax, atlas.profiles[k].max_abs());
  }
  const double kmax = kPi / g.h();
  const double lam_disp = mult * kmax * kmax * std::max(wmax, 1e-300);
  double dt = 1.5 / lam_disp;
  // advective estimate from a cheap coefficient probe
  const CoupledRhs rhs = coupled_rhs(atlas, atlas.cascade.a);
  if (rhs.max_u > 0) dt = std::min(dt, 0.45 * g.h() / rhs.max_u);
  return dt;
}

StepResult step_profiles(const BubbleAtlas& atlas, const ModelParams& params, double dt) {
  if (dt == 0.0) throw StepSizeError("step_profiles: dt must be nonzero");
  BubbleAtlas base = atlas;
  base.params = params;
  const Grid& g = base.ref_grid();
  const int n = base.n();
  const std::vector<double> couplings = base.cascade.a;  // frozen across substeps

  auto apply = [&](const BubbleAtlas& a0, const CoupledRhs& k, double fac) {
    BubbleAtlas out = a0;
    for (int kk = 0; kk <= n; ++kk) {
      out.cascade.x[kk] = a0.cascade.x[kk] + fac * k.xdot[kk];
      for (int i = 0; i < g.n; ++i)
        out.profiles[kk].values[i] = a0.profiles[kk].values[i] + fac * k.wdot[kk][i];
    }
    out.cascade.t = a0.cascade.t + fac;
    return out;
  };

  const CoupledRhs k1 = coupled_rhs(base, couplings);
  if (k1.max_u * std::abs(dt) > 0.5 * g.h())
    throw StepSizeError("step_profiles: CFL violated, max|u|*|dt| = " +
                        std::to_string(k1.max_u * std::abs(dt)) + " > h/2 = " +
                        std::to_string(0.5 * g.h()));

  BubbleAtlas s2 = apply(base, k1, 0.5 * dt);
  const CoupledRhs k2 = coupled_rhs(s2, couplings);
  BubbleAtlas s3 = apply(base, k2, 0.5 * dt);
  const CoupledRhs k3 = coupled_rhs(s3, couplings);
  BubbleAtlas s4 = apply(base, k3, dt);
  const CoupledRhs k4 = coupled_rhs(s4, couplings);

  StepResult res;
  res.atlas = base;
  res.atlas.cascade.t = base.cascade.t + dt;
  for (int kk = 0; kk <= n; ++kk) {
    res.atlas.cascade.x[kk] =
        base.cascade.x[kk] +
        dt / 6.0 * (k1.xdot[kk] + 2 * k2.xdot[kk] + 2 * k3.xdot[kk] + k4.xdot[kk]);
    for (int i = 0; i < g.n; ++i)
      res.atlas.profiles[kk].values[i] =
          base.profiles[kk].values[i] +
          dt / 6.0 * (k1.wdot[kk][i] + 2 * k2.wdot[kk][i] + 2 * k3.wdot[kk][i] +
                      k4.wdot[kk][i]);
  }
  res.max_u = k1.max_u;
  res.max_sigma = k1.max_sigma;

  // refresh couplings for the next macro step
  res.atlas.cascade.a = coupling_coefficients(res.atlas);

  // support escape: profile mass reaching any of the four active-band edges
  int nlo, nhi, plo, phi;
  res.atlas.active_ranges(nlo, nhi, plo, phi);
  const int edge[8] = {nlo, nlo + 1, nhi - 2, nhi - 1, plo, plo + 1, phi - 2, phi - 1};
  for (int kk = 0; kk <= n && !res.support_escape; ++kk) {
    const double scale = std::max(res.atlas.profiles[kk].max_abs(), 1e-300);
    for (int e : edge)
      if (std::abs(res.atlas.profiles[kk].values[e]) > 1e-10 * scale)
        res.support_escape = true;
  }

  // renormalize declared supports from the current mass distribution
  for (int kk = 0; kk <= n; ++kk) {
    auto& prof = res.atlas.profiles[kk];
    const double tol = 1e-12 * std::max(prof.max_abs(), 1e-300);
    double nlo = 0, nhi = 0, plo = 0, phi = 0;
    bool has_neg = false, has_pos = false;
    for (int i = 0; i < g.n; ++i) {
      if (std::abs(prof.values[i]) <= tol) continue;
      const double x = g.point(i);
      if (x < 0) {
        if (!has_neg) { nlo = x; has_neg = true; }
        nhi = x;
      } else {
        if (!has_pos) { plo = x; has_pos = true; }
        phi = x;
      }
    }
    prof.support.clear();
    if (has_neg) prof.support.push_back({nlo, nhi});
    if (has_pos) prof.support.push_back({plo, phi});
  }
  return res;
}

SupportTracker::SupportTracker(const BubbleAtlas& atlas) {
  const int n = atlas.n();
  pos_.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const auto& sup = atlas.profiles[k].support;
    if (sup.size() == 2) {
      pos_[k] = {sup[0].lo, sup[0].hi, sup[1].lo, sup[1].hi};
    } else {
      const double r = atlas.params.r;
      pos_[k] = {-1.0 - r, -1.0 + r, 1.0 - r, 1.0 + r};
    }
  }
  pos0_ = pos_;
}

void SupportTracker::observe(const BubbleAtlas& atlas, const CoupledRhs& rhs, double dt) {
  const ModelParams& p = atlas.params;
  const Grid& g = atlas.ref_grid();
  for (int k = 0; k <= atlas.n(); ++k) {
    const SampledField dH = interaction_field(atlas, k, 1, InteractionSign::All);
    const double rho = rhs.xdot[k] / atlas.cascade.x[k];
    const double coef = 2.0 * p.b / atlas.cascade.x[k] * std::pow(p.A / p.r, k);
    for (int e = 0; e < 4; ++e) {
      const double xi = pos_[k][e];
      const int idx = g.nearest(xi);
      const double u = coef * dH.values[idx] + xi * rho;
      // characteristics of dW/dt = u dW + ... move features with speed -u
      pos_[k][e] -= u * dt;
    }
  }
}

SupportReport SupportTracker::report(double r) const {
  SupportReport rep;
  rep.bound = r;
  for (size_t k = 0; k < pos_.size(); ++k) {
    double d = 0.0;
    for (int e = 0; e < 4; ++e) d = std::max(d, std::abs(pos_[k][e] - pos0_[k][e]));
    rep.displacement.push_back(d);
    rep.max_displacement = std::max(rep.max_displacement, d);
  }
  rep.pass = rep.max_displacement <= r;
  return rep;
}

BootstrapReport bootstrap_monitor(const BubbleAtlas& atlas, const SeedProfile& seed,
                                  double epsilon) {
  if (!(seed.field.grid == atlas.ref_grid()))
    throw ConfigError("bootstrap_monitor: seed and atlas grids are incompatible");
  BootstrapReport rep;
  const Grid& g = atlas.ref_grid();
  const double h = g.h();
  const double r = atlas.params.r;
  rep.l1_bound = 512.0 * std::pow(r, 4) * std::sqrt(2.0 * r) * epsilon;

  rep.support_ok = true;
  const double win_lo = 1.0 - 2.0 * r, win_hi = 1.0 + 2.0 * r;
  std::vector<double> diff(g.n);
  for (int k = 0; k <= atlas.n(); ++k) {
    const auto& W = atlas.profiles[k].values;
    for (int i = 0; i < g.n; ++i) diff[i] = W[i] - seed.field.values[i];
    const std::vector<double> d4 = fd_derivative(diff, h, 4);
    rep.h4_distance.push_back(l2_norm(d4, h));
    double l1 = 0.0;
    for (double v : diff) l1 += std::abs(v);
    rep.l1_distance.push_back(l1 * h);
    // mass confined to the bootstrap windows +-[1-2r, 1+2r]
    const double scale = std::max(atlas.profiles[k].max_abs(), 1e-300);
    for (int i = 0; i < g.n; ++i) {
      const double ax = std::abs(g.point(i));
      if ((ax < win_lo || ax > win_hi) && std::abs(W[i]) > 1e-10 * scale)
        rep.support_ok = false;
    }
  }
  rep.max_h4 = *std::max_element(rep.h4_distance.begin(), rep.h4_distance.end());
  rep.h4_ok = rep.max_h4 <= epsilon;
  rep.l1_ok = true;
  for (double v : rep.l1_distance)
    if (v > rep.l1_bound) rep.l1_ok = false;
  return rep;
}

EnergyTerms energy_terms(const SampledField& W_k, const SeedProfile& seed,
                         const BubbleAtlas& atlas, int k, const ModelParams& params) {
  const Grid& g = atlas.ref_grid();
  const double h = g.h();
  const int n = g.n;
  if (n < 128)
    throw ResolutionError("energy_terms: resolution too coarse for 8th-order content");

  BubbleAtlas tmp = atlas;
  tmp.profiles[k] = W_k;
  const SampledField dH = interaction_field(tmp, k, 1, InteractionSign::All);
  const SampledField d2H = interaction_field(tmp, k, 2, InteractionSign::All);
  const std::vector<double> xdot = cascade_xdot(tmp, tmp.cascade.a);
  const double rho = xdot[k] / tmp.cascade.x[k];
  const double coefP = 2.0 * params.b / tmp.cascade.x[k] * std::pow(params.A / params.r, k);

  std::vector<double> gdiff(n), P(n), Q(n);
  for (int i = 0; i < n; ++i) {
    gdiff[i] = W_k.values[i] - seed.field.values[i];
    P[i] = coefP * dH.values[i];
    Q[i] = params.b * d2H.values[i];
  }
  const std::vector<double> d4g = fd_derivative(gdiff, h, 4);
  const std::vector<double> dg = fd_derivative(gdiff, h, 1);
  const std::vector<double> dphi = fd_derivative(seed.field.values, h, 1);
  const std::vector<double> d4phi = fd_derivative(seed.field.values, h, 4);

  auto pair4 = [&](const std::vector<double>& prod) {
    // int d4(g) . d4(prod), all boundary terms vanish on compact support
    const std::vector<double> d4p = fd_derivative(prod, h, 4);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += d4g[i] * d4p[i];
    return s * h;
  };

  std::vector<double> tmpv(n);
  EnergyTerms out;
  out.h4 = l2_norm(d4g, h);

  for (int i = 0; i < n; ++i) tmpv[i] = P[i] * dg[i];
  out.E[0] = pair4(tmpv);
  for (int i = 0; i < n; ++i) tmpv[i] = P[i] * dphi[i];
  out.E[1] = pair4(tmpv);
  for (int i = 0; i < n; ++i) tmpv[i] = g.point(i) * rho * dg[i];
  out.E[2] = pair4(tmpv);
  for (int i = 0; i < n; ++i) tmpv[i] = g.point(i) * rho * dphi[i];
  out.E[3] = pair4(tmpv);
  for (int i = 0; i < n; ++i) tmpv[i] = Q[i] * gdiff[i];
  out.E[4] = pair4(tmpv);
  for (int i = 0; i < n; ++i) tmpv[i] = Q[i] * seed.field.values[i];
  out.E[5] = pair4(tmpv);
  out.E[6] = -3.0 * rho * out.h4 * out.h4;  // -3 rho int d8(g) g = -3 rho ||d4 g||^2
  {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += d4g[i] * d4phi[i];
    out.E[7] = -3.0 * rho * s * h;
  }
  return out;
}

double energy_identity_check(const SampledField& W, int N, double rho, double c,
                             double dt) {
  // spectral realization of the decoupled scaling flow dW/dt = rho (xi dW - c W)
  // on the (power-of-two) reference grid; the compact support makes the
  // periodic wrap exact to spectral accuracy
  const Grid& g = W.grid;
  if (!g.power_of_two())
    throw ConfigError("energy_identity_check: power-of-two grid required");
  const int n = g.n;
  const int nh = n / 2 + 1;
  const double k0 = 2.0 * kPi / g.length();

  auto to_spec = [&](const std::vector<double>& v) { return real_fft(v); };
  auto to_phys = [&](const std::vector<std::complex<double>>& s_) {
    return real_ifft(s_, n);
  };
  auto flow_rhs = [&](const std::vector<double>& w) {
    auto spec = to_spec(w);
    for (int k = 0; k < nh; ++k) spec[k] *= std::complex<double>(0.0, k0 * k);
    const std::vector<double> dw = to_phys(spec);
    std::vector<double> out(w.size());
    for (int i = 0; i < n; ++i) out[i] = rho * (g.point(i) * dw[i] - c * w[i]);
    return out;
  };
  auto norm2 = [&](const std::vector<double>& w) {
    auto spec = to_spec(w);
    double s_ = 0.0;
    for (int k = 0; k < nh; ++k) {
      const double wgt = std::pow(k0 * k, 2.0 * N) * std::norm(spec[k]);
      s_ += (k == 0 || k == n / 2) ? wgt : 2.0 * wgt;
    }
    return s_ * g.length();
  };

  const std::vector<double>& w0 = W.values;
  const std::vector<double> k1 = flow_rhs(w0);
  std::vector<double> tmp(w0.size());
  for (int i = 0; i < n; ++i) tmp[i] = w0[i] + 0.5 * dt * k1[i];
  const std::vector<double> k2 = flow_rhs(tmp);
  for (int i = 0; i < n; ++i) tmp[i] = w0[i] + 0.5 * dt * k2[i];
  const std::vector<double> k3 = flow_rhs(tmp);
  for (int i = 0; i < n; ++i) tmp[i] = w0[i] + dt * k3[i];
  const std::vector<double> k4 = flow_rhs(tmp);
  std::vector<double> w1(w0.size());
  for (int i = 0; i < n; ++i)
    w1[i] = w0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

  const double measured = (norm2(w1) - norm2(w0)) / dt;
  std::vector<double> wm(w0.size());
  for (int i = 0; i < n; ++i) wm[i] = 0.5 * (w0[i] + w1[i]);
  const double predicted = 2.0 * rho * (N - 0.5 - c) * norm2(wm);
  const double scale = std::max(std::abs(predicted), std::abs(measured));
  return scale > 0 ? std::abs(measured - predicted) / scale : 0.0;
}

namespace {

struct TrialResult {
  bool held = false;
  double t_reached = 0.0;
};

TrialResult trial_run(const ModelParams& params, const SeedProfile& seed, double T,
                      int steps, double eps) {
  BubbleAtlas atlas = initial_atlas(params, seed);
  double dt_cap = recommended_dt(atlas);
  const double dt = -std::min(T / steps, dt_cap);
  TrialResult res;
  while (atlas.cascade.t > -T + 1e-3 * std::abs(dt)) {
    StepResult sr = step_profiles(atlas, params, dt);
    atlas = std::move(sr.atlas);
    double max_h4 = 0.0;
    const Grid& g = atlas.ref_grid();
    std::vector<double> diff(g.n);
    for (int k = 0; k <= atlas.n(); ++k) {
      for (int i = 0; i < g.n; ++i)
        diff[i] = atlas.profiles[k].values[i] - seed.field.values[i];
      max_h4 = std::max(max_h4, l2_norm(fd_derivative(diff, g.h(), 4), g.h()));
    }
    if (max_h4 > eps || sr.support_escape) {
      res.held = false;
      res.t_reached = atlas.cascade.t;
      return res;
    }
  }
  res.held = true;
  res.t_reached = atlas.cascade.t;
  return res;
}

}  // namespace

CoupledRunResult run_coupled(const ModelParams& params, const SeedProfile& seed,
                             const RunControl& control) {
  params.validate();
  CoupledRunResult result;
  const double eps = params.epsilon;

  double T = params.T;
  if (T <= 0.0) {
    // probe the initial growth rate of sqrt(E) to seed the bracket
    BubbleAtlas atlas = initial_atlas(params, seed);
    const Grid g = atlas.ref_grid();
    double dt = -control.probe_dt;
    double K_est = 0.0;
    for (int s = 0; s < 2; ++s) {
      StepResult sr = step_profiles(atlas, params, dt);
      atlas = std::move(sr.atlas);
    }
    std::vector<double> diff(g.n);
    double max_h4 = 0.0;
    for (int k = 0; k <= atlas.n(); ++k) {
      for (int i = 0; i < g.n; ++i)
        diff[i] = atlas.profiles[k].values[i] - seed.field.values[i];
      max_h4 = std::max(max_h4, l2_norm(fd_derivative(diff, g.h(), 4), g.h()));
    }
    K_est = max_h4 / std::abs(atlas.cascade.t);
    if (!(K_est > 0.0))
      throw NumericalError("run_coupled: degenerate growth probe");
    double guess = 0.7 * eps / K_est;

    // bracket by doubling/halving, then bisect
    double lo = 0.0, hi = 0.0;
    TrialResult tr = trial_run(params, seed, guess, control.steps, eps);
    if (tr.held) {
      lo = guess;
      double up = guess;
      for (int i = 0; i < control.max_doublings; ++i) {
        up *= 2.0;
        tr = trial_run(params, seed, up, control.steps, eps);
        if (!tr.held) { hi = up; break; }
        lo = up;
      }
      if (hi == 0.0) hi = 2.0 * lo;
    } else {
      hi = guess;
      double down = guess;
      for (int i = 0; i < control.max_doublings; ++i) {
        down *= 0.5;
        tr = trial_run(params, seed, down, control.steps, eps);
        if (tr.held) { lo = down; break; }
        hi = down;
      }
      if (lo == 0.0)
        throw NumericalError("run_coupled: bootstrap fails for every trial window");
    }
    for (int i = 0; i < control.bisect_iters; ++i) {
      const double mid = 0.5 * (lo + hi);
      tr = trial_run(params, seed, mid, control.steps, eps);
      (tr.held ? lo : hi) = mid;
    }
    T = lo;
  }
  result.T_discovered = T;

  // verified run with monitors
  BubbleAtlas atlas = initial_atlas(params, seed);
  SupportTracker tracker(atlas);
  const double dt = -std::min(T / control.steps, recommended_dt(atlas));
  result.bootstrap_held = true;
  while (atlas.cascade.t > -T + 1e-3 * std::abs(dt)) {
    const CoupledRhs rhs0 = coupled_rhs(atlas, atlas.cascade.a);
    tracker.observe(atlas, rhs0, std::abs(dt));
    StepResult sr = step_profiles(atlas, params, dt);
    atlas = std::move(sr.atlas);
    if (sr.support_escape) result.bootstrap_held = false;

    MonitorRow row;
    row.t = atlas.cascade.t;
    for (int k = 0; k <= atlas.n(); ++k) {
      EnergyTerms et = energy_terms(atlas.profiles[k], seed, atlas, k, params);
      row.max_h4 = std::max(row.max_h4, et.h4);
      for (int i = 0; i < 8; ++i) {
        const double basis = std::max(et.basis(i), 1e-300);
        row.Ei_ratio[i] = std::max(row.Ei_ratio[i], std::abs(et.E[i]) / basis);
      }
    }
    row.sqrtE_over_t = row.max_h4 / std::abs(row.t);
    result.series.push_back(row);
    if (row.max_h4 > eps) result.bootstrap_held = false;
  }

  // Groenwall fit and E_i ratio stability over the developed part of the run
  double K_max = 0.0, K_min = 1e300;
  std::array<double, 8> rmin{}, rmax{};
  rmin.fill(1e300);
  rmax.fill(0.0);
  const double h4_floor = 0.05 * result.series.back().max_h4;
  for (const auto& row : result.series) {
    if (row.max_h4 < h4_floor) continue;
    K_max = std::max(K_max, row.sqrtE_over_t);
    K_min = std::min(K_min, row.sqrtE_over_t);
    for (int i = 0; i < 8; ++i) {
      if (row.Ei_ratio[i] <= 0) continue;
      rmin[i] = std::min(rmin[i], row.Ei_ratio[i]);
      rmax[i] = std::max(rmax[i], row.Ei_ratio[i]);
    }
  }
  result.K_fit = K_max;
  result.K_spread = (K_min < 1e300 && K_min > 0) ? K_max / K_min : 0.0;
  result.ratios_stable = true;
  for (int i = 0; i < 8; ++i) {
    result.ratio_spread[i] = (rmin[i] < 1e300 && rmin[i] > 0) ? rmax[i] / rmin[i] : 1.0;
    if (result.ratio_spread[i] > 2.0) result.ratios_stable = false;
  }

  result.support = tracker.report(params.r);
  result.final_bootstrap = bootstrap_monitor(atlas, seed, eps);
  result.final_atlas = std::move(atlas);
  return result;
}

}  // namespace emhd
