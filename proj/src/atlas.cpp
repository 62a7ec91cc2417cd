#include "emhd/atlas.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include "emhd/hilbert.hpp"

namespace emhd {

namespace {
constexpr double kPi = 3.14159265358979323846;
std::mutex atlas_fftw_mutex;
}  // namespace

std::vector<int> BubbleAtlas::active_indices() const {
  const Grid& g = ref_grid();
  const double lo = 1.0 - 2.0 * params.r - params.margin_or_default();
  const double hi = 1.0 + 2.0 * params.r + params.margin_or_default();
  std::vector<int> idx;
  for (int i = 0; i < g.n; ++i) {
    const double ax = std::abs(g.point(i));
    if (ax >= lo && ax <= hi) idx.push_back(i);
  }
  return idx;
}

void BubbleAtlas::active_ranges(int& neg_lo, int& neg_hi, int& pos_lo, int& pos_hi) const {
  const Grid& g = ref_grid();
  const double lo = 1.0 - 2.0 * params.r - params.margin_or_default();
  const double hi = 1.0 + 2.0 * params.r + params.margin_or_default();
  neg_lo = neg_hi = pos_lo = pos_hi = 0;
  bool in_neg = false, in_pos = false;
  for (int i = 0; i < g.n; ++i) {
    const double x = g.point(i);
    const double ax = std::abs(x);
    const bool act = ax >= lo && ax <= hi;
    if (x < 0) {
      if (act && !in_neg) { neg_lo = i; in_neg = true; }
      if (act) neg_hi = i + 1;
    } else {
      if (act && !in_pos) { pos_lo = i; in_pos = true; }
      if (act) pos_hi = i + 1;
    }
  }
}

void BubbleAtlas::validate() const {
  params.validate();
  if (static_cast<int>(profiles.size()) != params.n + 1)
    throw ConfigError("atlas: profile count must be n+1");
  if (static_cast<int>(cascade.x.size()) != params.n + 1)
    throw ConfigError("atlas: cascade state size must be n+1");
  for (double xk : cascade.x)
    if (!(xk > 0.0)) throw CascadeDegeneracyError("atlas: scaling factor x_k <= 0");
  for (const auto& p : profiles) {
    if (!(p.grid == ref_grid())) throw ConfigError("atlas: profiles must share one grid");
    for (double v : p.values)
      if (!std::isfinite(v)) throw InvalidFieldError("atlas: non-finite profile value");
  }
}

BubbleAtlas initial_atlas(const ModelParams& params, const SeedProfile& seed) {
  params.validate();
  if (seed.field.grid.n != params.pts_per_bubble)
    throw ConfigError("initial_atlas: seed grid does not match pts_per_bubble");

  BubbleAtlas atlas;
  atlas.params = params;
  atlas.cascade.t = 0.0;
  atlas.cascade.x.resize(params.n + 1);
  for (int k = 0; k <= params.n; ++k) atlas.cascade.x[k] = std::pow(params.A, k);
  atlas.profiles.assign(params.n + 1, seed.field);
  atlas.cascade.a.assign(params.n + 1, seed.delta0);

  // verify B_k(x,0) = r^{3k} A^k phi(x/r^k) pointwise on a sample set
  const Grid& g = atlas.ref_grid();
  for (int k = 0; k <= params.n; ++k) {
    const double pref = atlas.prefactor(k, 0);
    const double expect_pref = std::pow(params.r, 3 * k) * std::pow(params.A, k);
    for (int i = g.n / 7; i < g.n; i += g.n / 5) {
      const double xi = g.point(i);
      const double lhs = pref * seed.field.values[i];
      const double rhs = expect_pref * seed.field.values[i];
      if (std::abs(lhs - rhs) > 1e-10 * (std::abs(rhs) + 1e-300))
        throw NumericalError("initial_atlas: ansatz identity violated at k=" +
                             std::to_string(k) + ", xi=" + std::to_string(xi));
    }
  }
  return atlas;
}

std::vector<double> coupling_coefficients(const BubbleAtlas& atlas) {
  atlas.validate();
  std::vector<double> a(atlas.n() + 1, 0.0);
  const Grid& g = atlas.ref_grid();
  int nlo, nhi, plo, phi;
  atlas.active_ranges(nlo, nhi, plo, phi);
  const double inner = 1.0 - 2.0 * atlas.params.r - atlas.params.margin_or_default();
  if (inner <= 2.0 * g.h())
    throw CascadeDegeneracyError("coupling_coefficients: profile support touches 0");
  const std::vector<double> zero{0.0};
  for (int j = 0; j <= atlas.n(); ++j) {
    const auto neg = farfield_dNH(atlas.profiles[j].values, g, nlo, nhi, zero, 2);
    const auto pos = farfield_dNH(atlas.profiles[j].values, g, plo, phi, zero, 2);
    a[j] = neg[0] + pos[0];
  }
  return a;
}

SampledField interaction_field(const BubbleAtlas& atlas, int k, int N,
                               InteractionSign sign) {
  if (N < 0 || N > 5)
    throw UnsupportedOrderError("interaction_field: N must be 0..5");
  if (k < 0 || k > atlas.n())
    throw ConfigError("interaction_field: bubble index out of range");

  const Grid& g = atlas.ref_grid();
  SampledField out = make_field(g);
  const std::vector<int> act = atlas.active_indices();
  std::vector<double> xi_act(act.size());
  for (size_t i = 0; i < act.size(); ++i) xi_act[i] = g.point(act[i]);

  int nlo, nhi, plo, phi;
  atlas.active_ranges(nlo, nhi, plo, phi);
  const double band_lo = 1.0 - 2.0 * atlas.params.r - atlas.params.margin_or_default();
  const double band_hi = 1.0 + 2.0 * atlas.params.r + atlas.params.margin_or_default();

  std::vector<double> acc(act.size(), 0.0);
  std::vector<double> eta(act.size());

  const int j_lo = (sign == InteractionSign::AboveK) ? k + 1 : 0;
  const int j_hi = (sign == InteractionSign::BelowK) ? k - 1 : atlas.n();
  for (int j = j_lo; j <= j_hi; ++j) {
    if (sign == InteractionSign::BelowK && j >= k) continue;
    if (sign == InteractionSign::AboveK && j <= k) continue;
    const double pref = atlas.prefactor(j, N);
    if (j == k) {
      if (sign != InteractionSign::All) continue;
      const std::vector<double> fd =
          (N <= 4) ? fd_derivative(atlas.profiles[k].values, g.h(), N)
                   : fd_derivative(fd_derivative(atlas.profiles[k].values, g.h(), 4),
                                   g.h(), N - 4);
      const std::vector<double> pv = pv_hilbert_at_nodes(fd, g, act);
      for (size_t i = 0; i < act.size(); ++i) acc[i] += pref * pv[i];
      continue;
    }
    const double scale = atlas.lambda(k) / atlas.lambda(j);
    // nested-support geometry: rescaled targets must stay clear of source bands
    const double amax = band_hi * scale, amin = band_lo * scale;
    const double gap = 2.0 * g.h();
    const bool clear_below = amax < band_lo - gap;   // j < k viewpoint
    const bool clear_above = amin > band_hi + gap;   // j > k viewpoint
    if (!clear_below && !clear_above)
      throw CascadeDegeneracyError(
          "interaction_field: supports of bubbles " + std::to_string(j) + " and " +
          std::to_string(k) + " overlap beyond tolerance (nesting lost)");
    for (size_t i = 0; i < act.size(); ++i) eta[i] = xi_act[i] * scale;
    const auto neg = farfield_dNH(atlas.profiles[j].values, g, nlo, nhi, eta, N);
    const auto pos = farfield_dNH(atlas.profiles[j].values, g, plo, phi, eta, N);
    for (size_t i = 0; i < act.size(); ++i) acc[i] += pref * (neg[i] + pos[i]);
  }
  for (size_t i = 0; i < act.size(); ++i) out.values[act[i]] = acc[i];
  return out;
}

std::vector<double> evaluate(const BubbleAtlas& atlas, const std::vector<double>& points,
                             int m) {
  if (m < 0 || m > 4)
    throw UnsupportedOrderError("evaluate: derivative order must be 0..4 "
                                "(profile grids carry reliable content to 4th order)");
  for (double p : points)
    if (!std::isfinite(p)) throw InvalidFieldError("evaluate: non-finite point");

  const Grid& g = atlas.ref_grid();
  const double h = g.h();
  std::vector<double> out(points.size(), 0.0);

  for (int k = 0; k <= atlas.n(); ++k) {
    const std::vector<double> fd =
        (m == 0) ? atlas.profiles[k].values : fd_derivative(atlas.profiles[k].values, h, m);
    const double lam = atlas.lambda(k);
    const double pref = atlas.prefactor(k, m);
    for (size_t i = 0; i < points.size(); ++i) {
      const double xi = points[i] / lam;
      if (xi <= g.x_min + h || xi >= g.x_max - 2 * h) continue;
      // cubic Lagrange interpolation at xi
      const double u = (xi - g.x_min) / h;
      const int i1 = static_cast<int>(std::floor(u));
      const double t = u - i1;
      auto at = [&](int idx) { return (idx < 0 || idx >= g.n) ? 0.0 : fd[idx]; };
      const double v = at(i1 - 1) * (-t * (t - 1) * (t - 2) / 6.0) +
                       at(i1) * ((t * t - 1) * (t - 2) / 2.0) +
                       at(i1 + 1) * (-t * (t + 1) * (t - 2) / 2.0) +
                       at(i1 + 2) * (t * (t * t - 1) / 6.0);
      out[i] += pref * v;
    }
  }
  return out;
}

PeakInfo max_d3(const BubbleAtlas& atlas) {
  PeakInfo info;
  const Grid& g = atlas.ref_grid();
  for (int k = 0; k <= atlas.n(); ++k) {
    const std::vector<double> d3 = fd_derivative(atlas.profiles[k].values, g.h(), 3);
    double mx = 0.0;
    int arg = 0;
    for (int i = 0; i < g.n; ++i)
      if (std::abs(d3[i]) > mx) { mx = std::abs(d3[i]); arg = i; }
    const double val = atlas.prefactor(k, 3) * mx;
    if (val > info.value) {
      info.value = val;
      info.k = k;
      info.x_peak = g.point(arg) * atlas.lambda(k);
    }
  }
  return info;
}

namespace {

// ||W||_{Hdot^m} with |xi|^m spectral weights on the zero-padded grid.
double spectral_sobolev(const std::vector<double>& w, double h, double m) {
  int n = static_cast<int>(w.size());
  int np = 1;
  while (np < 2 * n) np <<= 1;
  std::vector<double> in(np, 0.0);
  std::copy(w.begin(), w.end(), in.begin());
  std::vector<std::complex<double>> spec(np / 2 + 1);
  {
    std::lock_guard<std::mutex> lock(atlas_fftw_mutex);
    fftw_plan plan = fftw_plan_dft_r2c_1d(np, in.data(),
                                          reinterpret_cast<fftw_complex*>(spec.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  const double L = np * h;
  double sum = 0.0;
  for (int k = 0; k <= np / 2; ++k) {
    const double xi = 2.0 * kPi * k / L;
    const double w2 = std::pow(xi, 2.0 * m);
    const double mag2 = std::norm(spec[k]);
    sum += (k == 0 || k == np / 2) ? w2 * mag2 : 2.0 * w2 * mag2;
  }
  return std::sqrt(sum * h / np);
}

}  // namespace

SobolevResult sobolev_norm(const BubbleAtlas& atlas, double m) {
  if (m < 0.0 || m > 3.5 || std::abs(m * 2 - std::round(m * 2)) > 1e-12)
    throw ConfigError("sobolev_norm: m must be 0..3.5 in half steps");
  SobolevResult res;
  const ModelParams& p = atlas.params;
  const double h = atlas.ref_grid().h();
  double sum2 = 0.0;
  for (int k = 0; k <= atlas.n(); ++k) {
    const double wnorm = spectral_sobolev(atlas.profiles[k].values, h, m);
    const double pref = std::pow(atlas.cascade.x[k], p.exponents.c - m + 0.5) *
                        std::pow(atlas.ratio(), (p.exponents.d - m + 0.5) * k);
    sum2 += pref * pref * wnorm * wnorm;
  }
  res.value = std::sqrt(sum2);
  res.tail_ratio = p.A * std::pow(p.r, 3.5 - m);
  res.divergence_warning = res.tail_ratio >= 1.0;
  res.convergent_m_max = 3.5 - std::log(p.A) / std::log(1.0 / p.r);
  return res;
}

double model_residual(const BubbleAtlas& before, const BubbleAtlas& after, double dt,
                      const ModelParams& params) {
  // midpoint atlas
  BubbleAtlas mid = before;
  mid.cascade.t = 0.5 * (before.cascade.t + after.cascade.t);
  for (int k = 0; k <= mid.n(); ++k) {
    mid.cascade.x[k] = 0.5 * (before.cascade.x[k] + after.cascade.x[k]);
    for (int i = 0; i < mid.ref_grid().n; ++i)
      mid.profiles[k].values[i] =
          0.5 * (before.profiles[k].values[i] + after.profiles[k].values[i]);
  }

  const Grid& g = mid.ref_grid();
  const std::vector<int> act = mid.active_indices();

  double num2 = 0.0;
  double den_dt2 = 0.0, den_tr2 = 0.0, den_st2 = 0.0;
  for (int k = 0; k <= mid.n(); ++k) {
    const double lam = mid.lambda(k);
    std::vector<double> pts(act.size());
    for (size_t i = 0; i < act.size(); ++i) pts[i] = g.point(act[i]) * lam;

    const std::vector<double> Ba = evaluate(after, pts, 0);
    const std::vector<double> Bb = evaluate(before, pts, 0);
    const std::vector<double> B = evaluate(mid, pts, 0);
    const std::vector<double> Bx = evaluate(mid, pts, 1);
    const SampledField dH = interaction_field(mid, k, 1, InteractionSign::All);
    const SampledField d2H = interaction_field(mid, k, 2, InteractionSign::All);

    const double wq = g.h() * lam;  // physical trapezoid weight on this bubble block
    for (size_t i = 0; i < act.size(); ++i) {
      const double J = -dH.values[act[i]];  // J = -H(dB)
      const double dtterm = (Ba[i] - Bb[i]) / dt;
      const double trans = 2.0 * params.b * J * Bx[i];
      const double stretch = params.b * d2H.values[act[i]] * B[i];
      const double resid = dtterm + trans - stretch;
      num2 += resid * resid * wq;
      den_dt2 += dtterm * dtterm * wq;
      den_tr2 += trans * trans * wq;
      den_st2 += stretch * stretch * wq;
    }
  }
  const double den = std::sqrt(std::max({den_dt2, den_tr2, den_st2, 1e-300}));
  return std::sqrt(num2) / den;
}

TailReport tail_report(const BubbleAtlas& atlas, int window_N) {
  TailReport rep;
  rep.window_N = std::max(window_N, 2);
  const int n = atlas.n();
  const int m_eval = std::min(window_N, 4);

  // window sample points [1/N, 1] and mirrored
  const int M = 1024;
  std::vector<double> pts;
  pts.reserve(2 * M);
  const double lo = 1.0 / rep.window_N;
  for (int i = 0; i < M; ++i) {
    const double x = lo + (1.0 - lo) * (i + 0.5) / M;
    pts.push_back(x);
    pts.push_back(-x);
  }

  // per-bubble contributions on the window, per derivative order
  std::vector<std::vector<double>> contrib(n + 1, std::vector<double>(pts.size(), 0.0));
  for (int k = 0; k <= n; ++k) {
    const double lam = atlas.lambda(k);
    const Grid& g = atlas.ref_grid();
    const std::vector<double> fd =
        (m_eval == 0) ? atlas.profiles[k].values
                      : fd_derivative(atlas.profiles[k].values, g.h(), m_eval);
    const double pref = atlas.prefactor(k, m_eval);
    for (size_t i = 0; i < pts.size(); ++i) {
      const double xi = pts[i] / lam;
      if (xi <= g.x_min + g.h() || xi >= g.x_max - 2 * g.h()) continue;
      const double u = (xi - g.x_min) / g.h();
      const int i1 = static_cast<int>(std::floor(u));
      const double t = u - i1;
      auto at = [&](int idx) { return (idx < 0 || idx >= g.n) ? 0.0 : fd[idx]; };
      contrib[k][i] = pref * (at(i1 - 1) * (-t * (t - 1) * (t - 2) / 6.0) +
                              at(i1) * ((t * t - 1) * (t - 2) / 2.0) +
                              at(i1 + 1) * (-t * (t + 1) * (t - 2) / 2.0) +
                              at(i1 + 2) * (t * (t * t - 1) / 6.0));
    }
  }

  // C^N distance between B_n and nested truncations B_{n'}
  for (int np = 0; np < n; ++np) {
    double dist = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      double tail = 0.0;
      for (int k = np + 1; k <= n; ++k) tail += contrib[k][i];
      dist = std::max(dist, std::abs(tail));
    }
    rep.truncations.push_back(np);
    rep.cN_distance.push_back(dist);
  }

  // H^m tail at the largest convergent half-step order
  const double m_max = 3.5 - std::log(atlas.params.A) / std::log(1.0 / atlas.params.r);
  rep.m_star = std::floor((m_max - 1e-9) * 2.0) / 2.0;
  if (rep.m_star > 3.0) rep.m_star = 3.0;
  std::vector<double> norms(n + 1, 0.0);
  {
    const double h = atlas.ref_grid().h();
    for (int k = 0; k <= n; ++k) {
      const double wnorm = spectral_sobolev(atlas.profiles[k].values, h, rep.m_star);
      const double pref =
          std::pow(atlas.cascade.x[k], atlas.params.exponents.c - rep.m_star + 0.5) *
          std::pow(atlas.ratio(), (atlas.params.exponents.d - rep.m_star + 0.5) * k);
      norms[k] = pref * wnorm;
    }
  }
  for (int k = 0; k <= n; ++k) {
    double tail = 0.0;
    for (int j = k + 1; j <= n; ++j) tail += norms[j];
    rep.hm_tail.push_back(tail);
  }
  // measured consecutive ratio of ||B_k||_{H3}-type norms
  double rmeas = 0.0;
  int cnt = 0;
  for (int k = 0; k + 1 <= n; ++k) {
    if (norms[k] > 0) {
      rmeas += norms[k + 1] / norms[k];
      ++cnt;
    }
  }
  rep.h3_tail_ratio_measured = cnt ? rmeas / cnt : 0.0;
  rep.h3_tail_ratio_expected =
      atlas.params.A * std::pow(atlas.params.r, 3.5 - rep.m_star);
  rep.geometric_decay = true;
  for (size_t i = 1; i + 1 < rep.hm_tail.size(); ++i)
    if (rep.hm_tail[i] > 0 && rep.hm_tail[i - 1] > 0 &&
        rep.hm_tail[i] / rep.hm_tail[i - 1] > 1.0)
      rep.geometric_decay = false;
  return rep;
}

}  // namespace emhd
