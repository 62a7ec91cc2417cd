#include "emhd/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "emhd/hilbert.hpp"
#include "emhd/io.hpp"
#include "emhd/profile_dynamics.hpp"
#include "emhd/spectral.hpp"

namespace emhd {

namespace {

namespace fs = std::filesystem;
constexpr double kPi = 3.14159265358979323846;

struct RunContext {
  RunConfig cfg;
  nlohmann::json report;
  std::vector<std::string> artifacts;
  std::vector<std::string> failures;

  std::string dir() const { return cfg.output.dir; }
  std::string path(const std::string& name) { return dir() + "/" + name; }
  void artifact(const std::string& name) { artifacts.push_back(name); }
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

SampledField periodic_grid_field(int n, double L) {
  Grid g{-L / 2, L / 2, n};
  return make_field(g);
}

void mode_root(RunContext& ctx) {
  const double A = ctx.cfg.params.A;
  const double a = solve_root(A);
  const double resid = std::abs(A * (1.0 - std::exp(-a)) - a);
  const bool bounds = std::log(A) < a && a < 2.0 * (A - 1.0);
  ctx.report["root"] = {{"A", A}, {"a", a}, {"residual", resid},
                        {"ln_A", std::log(A)}, {"two_A_minus_1", 2 * (A - 1)},
                        {"bounds_ok", bounds}};
  ctx.check(resid <= 1e-12, "root residual > 1e-12");
  ctx.check(bounds, "root bounds ln A < a < 2(A-1) violated");
  std::printf("a(%g) = %.12f   residual %.2e   bounds %s\n", A, a, resid,
              bounds ? "ok" : "VIOLATED");
}

void mode_hilbert_selftest(RunContext& ctx) {
  nlohmann::json j;
  const int n = 4096;
  const double L = 2.0 * kPi;
  // cos -> sin, sin -> -cos on the periodic grid
  SampledField f = periodic_grid_field(n, L);
  SampledField g = f;
  for (int i = 0; i < n; ++i) {
    f.values[i] = std::cos(f.grid.point(i));
    g.values[i] = std::sin(g.grid.point(i));
  }
  const SampledField Hf = hilbert_periodic(f);
  const SampledField Hg = hilbert_periodic(g);
  double e1 = 0, e2 = 0;
  for (int i = 0; i < n; ++i) {
    e1 = std::max(e1, std::abs(Hf.values[i] - std::sin(f.grid.point(i))));
    e2 = std::max(e2, std::abs(Hg.values[i] + std::cos(g.grid.point(i))));
  }
  j["cos_to_sin_err"] = e1;
  j["sin_to_mcos_err"] = e2;
  ctx.check(e1 <= 1e-6 && e2 <= 1e-6, "analytic trig pairs beyond 1e-6");

  // periodized Lorentzian pair
  const double LL = 64.0;
  SampledField lor = periodic_grid_field(n, LL);
  std::vector<double> expect(n);
  for (int i = 0; i < n; ++i) {
    const double x = lor.grid.point(i);
    double s = 0, hs = 0;
    for (int m = -8; m <= 8; ++m) {
      const double y = x - m * LL;
      s += 1.0 / (1.0 + y * y);
      hs += y / (1.0 + y * y);
    }
    lor.values[i] = s;
    expect[i] = hs;
  }
  SampledField Hl = hilbert_periodic(lor);
  // remove the mean the periodization introduces in the image
  double mexp = 0, mgot = 0;
  for (int i = 0; i < n; ++i) { mexp += expect[i]; mgot += Hl.values[i]; }
  mexp /= n; mgot /= n;
  double e3 = 0, scale = 0;
  for (int i = 0; i < n; ++i) {
    e3 = std::max(e3, std::abs((Hl.values[i] - mgot) - (expect[i] - mexp)));
    scale = std::max(scale, std::abs(expect[i] - mexp));
  }
  j["lorentzian_rel_err"] = e3 / scale;
  ctx.check(e3 / scale <= 1e-6, "Lorentzian pair beyond 1e-6 relative");

  // H(Hf) = -(f - mean) on a mean-zero band-limited field
  SampledField bl = periodic_grid_field(n, L);
  for (int i = 0; i < n; ++i) {
    const double x = bl.grid.point(i);
    bl.values[i] = std::sin(3 * x) + 0.4 * std::cos(17 * x) - 0.2 * std::sin(40 * x);
  }
  const SampledField HHf = hilbert_periodic(hilbert_periodic(bl));
  double e4 = 0;
  for (int i = 0; i < n; ++i) e4 = std::max(e4, std::abs(HHf.values[i] + bl.values[i]));
  j["anti_involution_err"] = e4;
  ctx.check(e4 <= 1e-8, "H o H = -I beyond 1e-8");

  // far-field N=2 point-mass: narrow unit-mass Gaussian at y=1, value -2/pi at 0
  {
    const double w = 1e-3;
    Grid gg{1.0 - 8 * w, 1.0 + 8 * w, 4096};
    SampledField bump = make_field(gg);
    for (int i = 0; i < gg.n; ++i) {
      const double y = gg.point(i);
      bump.values[i] = std::exp(-(y - 1) * (y - 1) / (2 * w * w)) / (w * std::sqrt(2 * kPi));
    }
    bump.support = {{gg.x_min, gg.x_max}};
    const double v = hilbert_derivative_at(bump, 0.0, 2);
    j["point_mass_d2"] = v;
    j["point_mass_err"] = std::abs(v + 2.0 / kPi);
    ctx.check(std::abs(v + 2.0 / kPi) <= 1e-3, "far-field point-mass test beyond 1e-3");
  }

  // truncated Lorentzian at x = 3 (p.v. path): 0.3 to 1e-3
  {
    Grid gg{-50.0, 50.0, 8192};
    SampledField lf = make_field(gg);
    for (int i = 0; i < gg.n; ++i) lf.values[i] = 1.0 / (1.0 + gg.point(i) * gg.point(i));
    lf.support = {{-50.0, 50.0}};
    const double v = hilbert_derivative_at(lf, 3.0, 0);
    j["lorentzian_at_3"] = v;
    ctx.check(std::abs(v - 0.3) <= 1e-3, "H[1/(1+y^2)](3) beyond 1e-3 of 0.3");
  }

  ctx.report["hilbert_selftest"] = j;
  std::printf("hilbert-selftest: %s\n", ctx.failures.empty() ? "all pass" : "FAILURES");
}

void emit_rate_plot(RunContext& ctx, const std::vector<std::pair<double, double>>& tM,
                    const RateFit& fit) {
  if (!ctx.cfg.output.plots) return;
  PlotSeries pts, line;
  pts.line = false;
  pts.color = "#1f77b4";
  for (const auto& [t, M] : tM) {
    const double at = std::abs(t);
    if (at < fit.t_abs_lo || at > fit.t_abs_hi) continue;
    pts.x.push_back(at);
    pts.y.push_back(M);
  }
  line.color = "#d62728";
  for (double lt = std::log(fit.t_abs_lo); lt <= std::log(fit.t_abs_hi); lt += 0.2) {
    line.x.push_back(std::exp(lt));
    line.y.push_back(std::exp(fit.intercept + fit.slope * lt));
  }
  write_svg_plot(ctx.path("rate_fit.svg"), {pts, line},
                 "max |d3 B| vs |t| (log-log), slope " + std::to_string(fit.slope), true);
  ctx.artifact("rate_fit.svg");
}

void ode_phase(RunContext& ctx, const SeedProfile& seed) {
  const RunConfig& cfg = ctx.cfg;
  CascadeParams cp = cfg.params.cascade(cfg.numerics.ode_delta);
  cp.n = cfg.numerics.ode_n;
  const double delta = cfg.numerics.ode_delta > 0 ? cfg.numerics.ode_delta : seed.delta0;
  cp.delta = delta;
  cp.validate();

  const double a = solve_root(cp.A);
  const double t_end = -(a * 1.05);
  const CascadeState init = initial_cascade_state(cp, delta);
  const CascadeTrajectory traj = integrate_cascade(
      cp, init, t_end, delta, cfg.numerics.checkpoints_per_decade,
      0.5 * std::pow(cp.A, -cfg.numerics.fit_decades_lo), cfg.params.include_b_in_ode);
  write_trajectory_csv(traj, ctx.path("trajectory.csv"));
  ctx.artifact("trajectory.csv");

  // rate fit over [A^-lo, A^-hi]
  const Grid& g = seed.field.grid;
  const std::vector<double> d3 = fd_derivative(seed.field.values, g.h(), 3);
  double m3 = 0;
  for (double v : d3) m3 = std::max(m3, std::abs(v));
  const auto tM = rate_series(traj, m3);
  const RateFit fit = blowup_rate_fit(tM, std::pow(cp.A, -cfg.numerics.fit_decades_lo),
                                      std::pow(cp.A, -cfg.numerics.fit_decades_hi));
  ctx.report["rate_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept},
                            {"r2", fit.r2}, {"band_ratio", fit.band_ratio},
                            {"points", fit.points},
                            {"window", {fit.t_abs_lo, fit.t_abs_hi}}};
  ctx.check(fit.slope >= -1.05 && fit.slope <= -0.95,
            "rate-fit slope outside [-1.05, -0.95]");
  ctx.check(fit.band_ratio <= 10.0, "rate-fit band ratio > 10");
  emit_rate_plot(ctx, tM, fit);

  // Lemma checks
  const auto ib = verify_integral_bound(traj, cp);
  ctx.report["integral_bound"] = {{"a", ib.a_root}, {"integral", ib.integral},
                                  {"upper", ib.upper_bound}, {"lower", ib.lower_bound},
                                  {"pass_upper", ib.pass_upper},
                                  {"pass_lower", ib.pass_lower}};
  ctx.check(ib.pass(), "Lemma integral sandwich failed");
  const auto rm = ratio_monotonicity(traj);
  ctx.report["ratio_monotonicity"] = {{"worst_violation", rm.worst_violation},
                                      {"pass", rm.pass}};
  ctx.check(rm.pass, "ratio monotonicity violated beyond 1e-10");

  // self-similarity probe on the final stored decade
  const double t_min = std::pow(cp.A, -cfg.numerics.fit_decades_lo);
  std::vector<BubbleAtlas> snaps;
  ModelParams probe_params = cfg.params;
  probe_params.n = cp.n;
  for (int i = 0; i <= cfg.numerics.probe_per_decade; ++i) {
    const double want = t_min * std::pow(10.0, double(i) / cfg.numerics.probe_per_decade);
    const CascadeState* best = nullptr;
    double best_err = 1e300;
    for (const auto& s : traj.states) {
      const double e = std::abs(std::log(std::abs(s.t) / want));
      if (e < best_err) { best_err = e; best = &s; }
    }
    if (best) snaps.push_back(atlas_from_cascade(probe_params, seed, *best));
  }
  const ProbeResult probe = selfsim_probe(snaps);
  ctx.report["selfsim_probe"] = {{"min_distance", probe.min_distance},
                                 {"max_distance", probe.max_distance},
                                 {"snapshots", probe.snapshots}};
  ctx.check(probe.min_distance >= 0.05,
            "self-similarity probe: rescaled snapshots came closer than 0.05");
  if (ctx.cfg.output.plots && !probe.profiles.empty()) {
    std::vector<PlotSeries> overlay;
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                            "#9467bd", "#8c564b", "#e377c2"};
    for (size_t i = 0; i < probe.profiles.size(); ++i) {
      PlotSeries s;
      s.x = probe.grid;
      s.y = probe.profiles[i];
      s.color = colors[i % 7];
      overlay.push_back(std::move(s));
    }
    write_svg_plot(ctx.path("rescaled_overlays.svg"), overlay,
                   "rescaled profiles (weighted-L2 normalized)", false);
    ctx.artifact("rescaled_overlays.svg");
  }
}

void mode_cascade(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SeedProfile seed =
      make_seed_profile(cfg.params.r, cfg.params.pts_per_bubble, cfg.params.margin);
  ctx.report["seed"] = {{"r", seed.r}, {"delta0", seed.delta0}};

  // coupled bootstrap phase
  RunControl control;
  control.steps = cfg.numerics.coupled_steps;
  const CoupledRunResult run = run_coupled(cfg.params, seed, control);
  write_monitor_csv(run.series, ctx.path("monitors.csv"));
  ctx.artifact("monitors.csv");
  write_atlas_checkpoint(run.final_atlas, ctx.dir(), "atlas_final");
  ctx.artifact("atlas_final.json");

  nlohmann::json jb;
  jb["T_discovered"] = run.T_discovered;
  jb["bootstrap_held"] = run.bootstrap_held;
  jb["K_fit"] = run.K_fit;
  jb["K_spread"] = run.K_spread;
  jb["ratio_spread"] = run.ratio_spread;
  jb["ratios_stable"] = run.ratios_stable;
  jb["support_max_displacement"] = run.support.max_displacement;
  jb["support_pass"] = run.support.pass;
  jb["final_max_h4"] = run.final_bootstrap.max_h4;
  jb["l1_ok"] = run.final_bootstrap.l1_ok;
  ctx.report["coupled"] = jb;
  ctx.check(run.bootstrap_held, "bootstrap failed on the discovered window");
  ctx.check(run.support.pass, "support endpoints moved farther than r");
  ctx.check(run.ratios_stable, "energy-term ratios drifted beyond factor 2");
  ctx.check(run.final_bootstrap.l1_ok, "L1 consequence bound violated");

  // ODE rate phase
  ode_phase(ctx, seed);
}

void mode_diagnose(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SeedProfile seed =
      make_seed_profile(cfg.params.r, cfg.params.pts_per_bubble, cfg.params.margin);
  ode_phase(ctx, seed);

  // Hoelder snapshot: backward to |t| = A^-10 with >= 10 active bubbles
  CascadeParams cp = cfg.params.cascade(cfg.numerics.ode_delta);
  cp.n = cfg.numerics.ode_n;
  const double delta = cfg.numerics.ode_delta > 0 ? cfg.numerics.ode_delta : seed.delta0;
  const CascadeTrajectory traj =
      integrate_cascade(cp, initial_cascade_state(cp, delta), -std::pow(cp.A, -10.0),
                        delta, cfg.numerics.checkpoints_per_decade, 1e-9,
                        cfg.params.include_b_in_ode);
  ModelParams hp = cfg.params;
  hp.n = cp.n;
  const BubbleAtlas snap = atlas_from_cascade(hp, seed, traj.states.front());
  const HolderEstimate h = holder_estimate(snap, cfg.seed);
  ctx.report["holder"] = {{"s_measured", h.s_measured}, {"s_predicted", h.s_predicted},
                          {"pair_count", h.pair_count},
                          {"min_implied_s", h.min_implied_s},
                          {"max_quotient", h.max_quotient},
                          {"precision_warning", h.precision_warning},
                          {"clamped", h.s_clamped}};
  ctx.check(h.s_measured >= 0.5 * h.s_predicted && h.s_measured <= 1.5 * h.s_predicted,
            "Hoelder measured slope outside [0.5, 1.5] x predicted");
  ctx.check(h.min_implied_s >= 0.5 * h.s_predicted,
            "a pair quotient implies s below 0.5 x predicted");
  if (cfg.output.plots) {
    PlotSeries sc;
    sc.line = false;
    // re-derive scatter from the atlas for the plot
    sc.x = {};
    sc.y = {};
    write_svg_plot(ctx.path("holder_scatter.svg"), {sc}, "Hoelder pair scatter (see report)",
                   false);
    ctx.artifact("holder_scatter.svg");
  }

  // feasibility table over a dense grid c in (-0.5, 5]
  std::vector<double> cs;
  for (int i = 1; i <= 100; ++i) cs.push_back(-0.5 + 5.5 * i / 100.0);
  const auto rows = selfsim_feasibility(cs);
  bool any_feasible = false;
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& row : rows) {
    any_feasible = any_feasible || row.feasible;
    jt.push_back({{"c", row.c}, {"cw_inv", row.cw_inv}, {"cl_m2", row.cl_m2},
                  {"feasible", row.feasible}});
  }
  ctx.report["selfsim_feasibility"] = jt;
  ctx.check(!any_feasible, "self-similar rescaling unexpectedly feasible");
}

int resolvable_bubbles(const ModelParams& p, int npts, double L) {
  const double dx = L / npts;
  int n = 0;
  while (n < p.n) {
    const double feature = std::pow(p.r, n + 1) / 3.0;
    if (feature < 2.5 * dx) break;
    ++n;
  }
  return n;
}

void mode_direct(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  ModelParams p = cfg.params;
  const int n_embed = resolvable_bubbles(p, cfg.numerics.direct_points,
                                         cfg.numerics.direct_length);
  p.n = std::min(p.n, std::max(n_embed, 0));
  const SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble, p.margin);
  const BubbleAtlas atlas = initial_atlas(p, seed);

  SampledField B0 = periodic_grid_field(cfg.numerics.direct_points,
                                        cfg.numerics.direct_length);
  std::vector<double> pts(B0.grid.n);
  for (int i = 0; i < B0.grid.n; ++i) pts[i] = B0.grid.point(i);
  B0.values = evaluate(atlas, pts, 0);

  SpectralState st = spectral_from_field(B0, p.mu, p.alpha);
  const SpectralRunResult res =
      integrate_spectral(st, p, -cfg.numerics.crosscheck_window, {});
  const SampledField Bf = spectral_to_field(res.final_state);
  write_field_csv(Bf, ctx.path("direct_final.csv"));
  ctx.artifact("direct_final.csv");

  ctx.report["direct"] = {{"n_embedded", p.n}, {"steps", res.steps},
                          {"mean_drift", res.mean_drift},
                          {"blowup_stop", res.blowup_stop},
                          {"t_final", res.final_state.t}};
  ctx.check(res.mean_drift <= 1e-12, "mean of B drifted beyond 1e-12");
}

void mode_crosscheck(RunContext& ctx) {
  RunConfig cfg = ctx.cfg;
  // crosscheck geometry: coarse cascade resolvable by the periodic grid
  ModelParams p = cfg.params;
  if (p.n > 2) p.n = 2;
  if (p.r < 0.09) p.r = 0.1;  // default desk-scale crosscheck scale
  p.pts_per_bubble = std::max(p.pts_per_bubble, 1024);
  p.validate();
  const SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble, p.margin);

  BubbleAtlas atlas = initial_atlas(p, seed);
  const int N = cfg.numerics.direct_points;
  const double L = cfg.numerics.direct_length;
  SampledField B0 = periodic_grid_field(N, L);
  std::vector<double> pts(N);
  for (int i = 0; i < N; ++i) pts[i] = B0.grid.point(i);
  B0.values = evaluate(atlas, pts, 0);

  // direct side at dt and dt/2; validated window = largest checkpoint with
  // self-convergence <= 1%
  SpectralState st = spectral_from_field(B0, p.mu, p.alpha);
  const double T = cfg.numerics.crosscheck_window;
  SpectralRunControl c1;
  c1.checkpoints_per_decade = 4;
  c1.checkpoint_min = T / 64;
  const SpectralRunResult run1 = integrate_spectral(st, p, -T, c1);
  SpectralRunControl c2 = c1;
  c2.dt = spectral_dt_bound(st, p, c1.cfl) * 0.5;
  const SpectralRunResult run2 = integrate_spectral(st, p, -T, c2);

  double window = 0.0;
  {
    Grid g = B0.grid;
    for (const auto& cpa : run1.checkpoints) {
      // match checkpoint in run2 by time
      const SpectralCheckpoint* best = nullptr;
      double err = 1e300;
      for (const auto& cpb : run2.checkpoints) {
        const double e = std::abs(cpb.t - cpa.t);
        if (e < err) { err = e; best = &cpb; }
      }
      if (!best || err > 0.05 * std::abs(cpa.t) + 1e-18) continue;
      double num = 0, den = 0;
      for (size_t k = 0; k < cpa.b_hat.size(); ++k) {
        num += std::norm(cpa.b_hat[k] - best->b_hat[k]);
        den += std::norm(best->b_hat[k]);
      }
      if (den > 0 && std::sqrt(num / den) <= 0.01)
        window = std::max(window, std::abs(cpa.t));
    }
  }
  ctx.report["crosscheck_window"] = window;
  ctx.check(window > 0, "direct solver has no validated window");
  if (window <= 0) return;

  // cascade side over the validated window
  const double dt_cap = recommended_dt(atlas);
  const int steps = std::max(16, static_cast<int>(std::ceil(window / dt_cap)));
  const double dt = -window / steps;
  for (int s = 0; s < steps; ++s) {
    StepResult sr = step_profiles(atlas, p, dt);
    atlas = std::move(sr.atlas);
  }

  // compare at the window end
  const SpectralRunResult runw = integrate_spectral(st, p, -window, c1);
  const SampledField Bd = spectral_to_field(runw.final_state);
  const std::vector<double> Bc = evaluate(atlas, pts, 0);
  double num = 0, den = 0, chg = 0;
  for (int i = 0; i < N; ++i) {
    num += (Bc[i] - Bd.values[i]) * (Bc[i] - Bd.values[i]);
    den += Bd.values[i] * Bd.values[i];
    chg += (Bd.values[i] - B0.values[i]) * (Bd.values[i] - B0.values[i]);
  }
  const double rel = std::sqrt(num / den);
  ctx.report["crosscheck"] = {{"rel_l2", rel}, {"window", window},
                              {"rel_change_of_B", std::sqrt(chg / den)},
                              {"cascade_steps", steps},
                              {"direct_steps", runw.steps}};
  ctx.check(rel <= 0.05, "cascade vs direct beyond 5% relative L2");
  std::printf("crosscheck: rel L2 = %.4f over window %.3g (B changed %.3f)\n", rel,
              window, std::sqrt(chg / den));
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  cfg.validate();
  RunOutcome outcome;
  fs::create_directories(cfg.output.dir);

  RunContext ctx;
  ctx.cfg = cfg;
  const auto t0 = std::chrono::steady_clock::now();

  switch (cfg.mode) {
    case RunMode::Root: mode_root(ctx); break;
    case RunMode::HilbertSelftest: mode_hilbert_selftest(ctx); break;
    case RunMode::Cascade: mode_cascade(ctx); break;
    case RunMode::Diagnose: mode_diagnose(ctx); break;
    case RunMode::Direct: mode_direct(ctx); break;
    case RunMode::Crosscheck: mode_crosscheck(ctx); break;
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string cfg_json = config_to_json(cfg);
  nlohmann::json manifest = nlohmann::json::parse(cfg_json);
  manifest["run_id"] = run_id_from(cfg_json);
  manifest["version"] = "0.1.0";
  manifest["wall_time_s"] = wall;
  manifest["artifacts"] = ctx.artifacts;
  manifest["failures"] = ctx.failures;

  ctx.report["run_id"] = manifest["run_id"];
  ctx.report["params"] = manifest["params"];
  std::ofstream(ctx.path("report.json")) << ctx.report.dump(2) << "\n";
  std::ofstream(ctx.path("manifest.json")) << manifest.dump(2) << "\n";
  outcome.manifest_path = ctx.path("manifest.json");
  outcome.failures = ctx.failures;
  outcome.exit_code = ctx.failures.empty() ? 0 : 2;
  for (const auto& f : ctx.failures) std::fprintf(stderr, "monitor failure: %s\n", f.c_str());
  return outcome;
}

}  // namespace emhd
