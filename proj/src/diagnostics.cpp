#include "emhd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace emhd {

BubbleAtlas atlas_from_cascade(const ModelParams& params, const SeedProfile& seed,
                               const CascadeState& state) {
  ModelParams p = params;
  p.n = state.n();
  BubbleAtlas atlas;
  atlas.params = p;
  atlas.cascade = state;
  if (atlas.cascade.a.empty()) atlas.cascade.a.assign(p.n + 1, seed.delta0);
  atlas.profiles.assign(p.n + 1, seed.field);
  return atlas;
}

RateFit blowup_rate_fit(const std::vector<std::pair<double, double>>& t_and_M,
                        double t_abs_lo, double t_abs_hi) {
  RateFit fit;
  fit.t_abs_lo = t_abs_lo;
  fit.t_abs_hi = t_abs_hi;
  std::vector<double> lx, ly;
  double band_lo = 1e300, band_hi = 0.0;
  for (const auto& [t, M] : t_and_M) {
    const double at = std::abs(t);
    if (at < t_abs_lo || at > t_abs_hi || M <= 0.0) continue;
    lx.push_back(std::log(at));
    ly.push_back(std::log(M));
    band_lo = std::min(band_lo, M * at);
    band_hi = std::max(band_hi, M * at);
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 4)
    throw CoverageError("blowup_rate_fit: window too short (" +
                        std::to_string(fit.points) + " checkpoints)");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sx += lx[i]; sy += ly[i];
    sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i]; syy += ly[i] * ly[i];
  }
  const double np = fit.points;
  const double denom = np * sxx - sx * sx;
  fit.slope = (np * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / np;
  const double ss_tot = syy - sy * sy / np;
  double ss_res = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    const double e = ly[i] - (fit.slope * lx[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.band_ratio = band_hi / band_lo;
  return fit;
}

std::vector<std::pair<double, double>> rate_series(const CascadeTrajectory& traj,
                                                   double max_d3_seed) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.states.size());
  for (const auto& s : traj.states) {
    double sup = 0.0;
    for (double xk : s.x) sup = std::max(sup, xk);
    out.emplace_back(s.t, sup * max_d3_seed);
  }
  return out;
}

HolderEstimate holder_estimate(const BubbleAtlas& atlas, unsigned seed, int random_pairs) {
  HolderEstimate est;
  const ModelParams& p = atlas.params;
  const double a = solve_root(p.A);
  est.s_predicted = (a - std::log(p.A)) / (a - std::log(p.r));
  if (est.s_predicted > 0.5) {
    est.s_predicted = 0.5;
    est.s_clamped = true;
  }

  const Grid& g = atlas.ref_grid();
  const int n = atlas.n();

  // positive-side peak of |d3 W_k| per bubble
  std::vector<double> peak_xi(n + 1), peak_val(n + 1);
  std::vector<std::vector<double>> d3(n + 1);
  for (int k = 0; k <= n; ++k) {
    d3[k] = fd_derivative(atlas.profiles[k].values, g.h(), 3);
    double mx = 0.0;
    int arg = g.n / 2;
    for (int i = g.n / 2; i < g.n; ++i)
      if (std::abs(d3[k][i]) > mx) { mx = std::abs(d3[k][i]); arg = i; }
    peak_xi[k] = g.point(arg);
    peak_val[k] = d3[k][arg];
  }

  // saturated bubbles: x_k has left the initial A^k branch
  std::vector<int> active;
  for (int k = 0; k <= n; ++k)
    if (atlas.cascade.x[k] < 0.25 * std::pow(p.A, k)) active.push_back(k);
  if (static_cast<int>(active.size()) < 10) est.precision_warning = true;

  std::vector<double> logd, logD;
  for (size_t i = 0; i + 1 < active.size(); ++i) {
    const int k = active[i];
    if (active[i + 1] != k + 1) continue;
    const double xk = peak_xi[k] * atlas.lambda(k);
    const double xk1 = peak_xi[k + 1] * atlas.lambda(k + 1);
    const double vk = atlas.prefactor(k, 3) * peak_val[k];
    const double vk1 = atlas.prefactor(k + 1, 3) * peak_val[k + 1];
    const double dist = std::abs(xk - xk1);
    const double dval = std::abs(vk - vk1);
    if (dist <= 0 || dval <= 0) continue;
    logd.push_back(std::log(dist));
    logD.push_back(std::log(dval));
  }
  est.pair_count = static_cast<int>(logd.size());
  if (est.pair_count < 2) {
    est.precision_warning = true;
    return est;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < logd.size(); ++i) {
    sx += logd[i]; sy += logD[i];
    sxx += logd[i] * logd[i]; sxy += logd[i] * logD[i];
  }
  const double np = static_cast<double>(logd.size());
  est.s_measured = (np * sxy - sx * sy) / (np * sxx - sx * sx);
  const double intercept = (sy - est.s_measured * sx) / np;

  // implied exponent per pair, including random within-bubble pairs
  est.min_implied_s = 1e300;
  auto update_pair = [&](double dist, double dval) {
    if (dist <= 0 || dval <= 0) return;
    est.max_quotient =
        std::max(est.max_quotient, dval / std::pow(dist, est.s_predicted));
    if (std::log(dist) < 0) {
      const double implied = (std::log(dval) - intercept) / std::log(dist);
      est.min_implied_s = std::min(est.min_implied_s, implied);
    }
  };
  for (size_t i = 0; i < logd.size(); ++i)
    update_pair(std::exp(logd[i]), std::exp(logD[i]));

  std::mt19937 rng(seed);
  for (int k : active) {
    std::vector<int> in_band;
    for (int i = g.n / 2; i < g.n; ++i)
      if (std::abs(std::abs(g.point(i)) - 1.0) <= 2.0 * p.r) in_band.push_back(i);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(in_band.size()) - 1);
    for (int q = 0; q < random_pairs / std::max<size_t>(active.size(), 1) + 1; ++q) {
      const int ia = in_band[pick(rng)], ib = in_band[pick(rng)];
      if (ia == ib) continue;
      const double dist = std::abs(g.point(ia) - g.point(ib)) * atlas.lambda(k);
      const double dval =
          std::abs(atlas.prefactor(k, 3) * (d3[k][ia] - d3[k][ib]));
      update_pair(dist, dval);
    }
  }
  return est;
}

std::vector<FeasibilityRow> selfsim_feasibility(const std::vector<double>& c_values) {
  std::vector<FeasibilityRow> rows;
  rows.reserve(c_values.size());
  for (double c : c_values) {
    if (c <= -0.5)
      throw ConfigError("selfsim_feasibility: c must exceed -1/2 (got " +
                        std::to_string(c) + ")");
    FeasibilityRow row;
    row.c = c;
    row.cw_inv = -(2.0 * c + 1.0);
    row.cl_m2 = -1.0 / (2.0 * c + 1.0);
    row.feasible = row.cl_m2 > 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace {

struct RescaledProfile {
  std::vector<double> vals;
};

double weighted_distance(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& w, double dg) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d * w[i];
  }
  return std::sqrt(s * dg);
}

}  // namespace

ProbeResult selfsim_probe(const std::vector<BubbleAtlas>& snapshots, double weight_power,
                          double grid_halfwidth, int grid_points) {
  ProbeResult res;
  res.weight_power = weight_power;
  res.snapshots = static_cast<int>(snapshots.size());
  if (snapshots.size() < 2)
    throw ProbeError("selfsim_probe: need at least two snapshots");

  std::vector<double> grid(grid_points), w(grid_points);
  const double dg = 2.0 * grid_halfwidth / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i) {
    grid[i] = -grid_halfwidth + i * dg;
    w[i] = std::pow(1.0 + grid[i] * grid[i], -weight_power);
  }

  std::vector<RescaledProfile> profs;
  for (const auto& atlas : snapshots) {
    const PeakInfo peak = max_d3(atlas);
    const double ell = std::abs(peak.x_peak);
    if (!(peak.value > 0.0) || !(ell > 0.0))
      throw ProbeError("selfsim_probe: degenerate scales (zero amplitude)");
    const double cw = 1.0 / (peak.value * ell * ell * ell);
    std::vector<double> pts(grid_points);
    for (int i = 0; i < grid_points; ++i) pts[i] = grid[i] * ell;
    std::vector<double> vals = evaluate(atlas, pts, 0);
    for (double& v : vals) v *= cw;
    double nrm = weighted_distance(vals, std::vector<double>(grid_points, 0.0), w, dg);
    if (nrm <= 0) throw ProbeError("selfsim_probe: zero rescaled profile");
    for (double& v : vals) v /= nrm;
    profs.push_back({std::move(vals)});
  }

  res.min_distance = 1e300;
  for (size_t i = 0; i < profs.size(); ++i) {
    for (size_t j = i + 1; j < profs.size(); ++j) {
      const double d = weighted_distance(profs[i].vals, profs[j].vals, w, dg);
      res.min_distance = std::min(res.min_distance, d);
      res.max_distance = std::max(res.max_distance, d);
    }
  }
  res.grid = grid;
  for (auto& pr : profs) res.profiles.push_back(std::move(pr.vals));
  return res;
}

ProbeResult selfsim_probe_fn(const std::vector<double>& times,
                             const std::function<double(double, double)>& u,
                             const std::function<double(double)>& length_scale,
                             const std::function<double(double)>& amp_scale,
                             double weight_power, double grid_halfwidth,
                             int grid_points) {
  ProbeResult res;
  res.weight_power = weight_power;
  res.snapshots = static_cast<int>(times.size());

  std::vector<double> grid(grid_points), w(grid_points);
  const double dg = 2.0 * grid_halfwidth / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i) {
    grid[i] = -grid_halfwidth + i * dg;
    w[i] = std::pow(1.0 + grid[i] * grid[i], -weight_power);
  }
  std::vector<std::vector<double>> profs;
  for (double t : times) {
    const double ell = length_scale(t);
    const double cw = amp_scale(t);
    std::vector<double> vals(grid_points);
    for (int i = 0; i < grid_points; ++i) vals[i] = cw * u(grid[i] * ell, t);
    double nrm = weighted_distance(vals, std::vector<double>(grid_points, 0.0), w, dg);
    if (nrm <= 0) throw ProbeError("selfsim_probe_fn: zero rescaled profile");
    for (double& v : vals) v /= nrm;
    profs.push_back(std::move(vals));
  }
  res.min_distance = 1e300;
  for (size_t i = 0; i < profs.size(); ++i)
    for (size_t j = i + 1; j < profs.size(); ++j) {
      const double d = weighted_distance(profs[i], profs[j], w, dg);
      res.min_distance = std::min(res.min_distance, d);
      res.max_distance = std::max(res.max_distance, d);
    }
  return res;
}

}  // namespace emhd
