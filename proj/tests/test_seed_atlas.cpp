#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emhd/atlas.hpp"
#include "emhd/hilbert.hpp"

using namespace emhd;

namespace {
ModelParams test_params(double r = 0.05, int n = 2, int pts = 1024) {
  ModelParams p;
  p.r = r;
  p.n = n;
  p.pts_per_bubble = pts;
  return p;
}
}  // namespace

TEST_CASE("seed profile: oddness, peak value, delta0 > 0") {
  const double r = 0.05;
  SeedProfile seed = make_seed_profile(r, 2048);
  const Grid& g = seed.field.grid;
  // phi(0) = 0 and odd on all grid points
  CHECK(seed.field.values[0] == 0.0);
  for (int i = 1; i < g.n; ++i)
    CHECK(seed.field.values[i] == doctest::Approx(-seed.field.values[g.n - i]).epsilon(1e-14));
  // peak value -+1 at x = +-1 (bump peak e^0 = 1), exact in the formula
  CHECK(seed_value(1.0, r) == -1.0);
  CHECK(seed_value(-1.0, r) == 1.0);
  const int i1 = g.nearest(1.0);
  CHECK(std::abs(seed.field.values[i1] + 1.0) <= 1e-4);  // nearest node
  CHECK(seed.delta0 > 0.0);
}

TEST_CASE("delta0 quadrature: frozen fine-grid trapezoid oracle, r = 0.05") {
  // (2/pi) int phi(y) (-y)^{-3} dy computed at two resolutions during
  // bring-up: 0.077016270010 (Richardson agreement < 1e-9)
  SeedProfile s1 = make_seed_profile(0.05, 2048);
  SeedProfile s2 = make_seed_profile(0.05, 4096);
  CHECK(s1.delta0 == doctest::Approx(0.077016270010).epsilon(1e-6));
  CHECK(std::abs(s1.delta0 - s2.delta0) <= 1e-6);
}

TEST_CASE("smoothness: finite differences up to order 8 stay bounded") {
  SeedProfile seed = make_seed_profile(0.05, 2048);
  const double h = seed.field.grid.h();
  std::vector<double> d = seed.field.values;
  for (int o = 0; o < 2; ++o) d = fd_derivative(d, h, 4);
  for (double v : d) CHECK(std::isfinite(v));
}

TEST_CASE("initial atlas: exponent cancellation at k = 0 and ansatz identity") {
  ModelParams p = test_params();
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  CHECK(atlas.prefactor(0, 0) == 1.0);
  CHECK(atlas.lambda(0) == 1.0);
  // max |d3 B_k(.,0)| = A^k max|phi'''|
  const Grid& g = atlas.ref_grid();
  const std::vector<double> d3 = fd_derivative(seed.field.values, g.h(), 3);
  double m3 = 0;
  for (double v : d3) m3 = std::max(m3, std::abs(v));
  for (int k = 0; k <= p.n; ++k) {
    const double mk = atlas.prefactor(k, 3) * m3;
    CHECK(mk == doctest::Approx(std::pow(p.A, k) * m3).epsilon(1e-12));
  }
}

TEST_CASE("initial atlas: ||d^m B_k||_L2 = (A r^{3.5-m})^k ||d^m phi||_L2") {
  ModelParams p = test_params(0.05, 3, 2048);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const Grid& g = atlas.ref_grid();
  for (int m : {0, 1, 2, 3}) {
    const double phi_m = l2_norm(fd_derivative(seed.field.values, g.h(), m), g.h());
    for (int k = 0; k <= p.n; ++k) {
      // change of variables: ||d^m B_k|| = x_k^{4.5-m} (r/A)^{(3.5-m)k} ||d^m W||
      const double lhs = std::pow(atlas.cascade.x[k], 4.5 - m) *
                         std::pow(atlas.ratio(), (3.5 - m) * k) * phi_m;
      const double rhs = std::pow(p.A * std::pow(p.r, 3.5 - m), k) * phi_m;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("coupling coefficients: identical profiles give identical entries") {
  ModelParams p = test_params();
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const std::vector<double> a = coupling_coefficients(atlas);
  for (int j = 0; j <= p.n; ++j)
    CHECK(a[j] == doctest::Approx(seed.delta0).epsilon(1e-12));
}

TEST_CASE("coupling stability under a perturbation of known H4 size") {
  ModelParams p = test_params(0.05, 1, 2048);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const Grid& g = atlas.ref_grid();
  // perturbation: scaled copy of phi so the Hdot4 norm is exact by homogeneity
  const double h4_phi = l2_norm(fd_derivative(seed.field.values, g.h(), 4), g.h());
  const double eps = 0.1;
  const double eta = eps / h4_phi;
  for (int i = 0; i < g.n; ++i) atlas.profiles[0].values[i] *= (1.0 + eta);
  const std::vector<double> a = coupling_coefficients(atlas);
  // Lemma band |a_j - delta0| <= C eps / (1-2r)^3; fitted C stays near
  // |delta0/h4_phi| * (1-2r)^3 for this perturbation family
  const double dev = std::abs(a[0] - seed.delta0);
  CHECK(dev > 0.0);
  const double C_fit = dev * std::pow(1 - 2 * p.r, 3) / eps;
  const double dev2 = std::abs(coupling_coefficients(atlas)[0] - seed.delta0);
  CHECK(dev2 <= 1.05 * C_fit * eps / std::pow(1 - 2 * p.r, 3));
}

TEST_CASE("interaction_field: empty below-sum is exactly zero") {
  ModelParams p = test_params(0.05, 0, 512);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const SampledField f = interaction_field(atlas, 0, 2, InteractionSign::BelowK);
  for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("interaction_field matches the scaling identity on two bubbles") {
  // H B_1(x) = x_1^4 (r/A)^3 (H W_1)(x / lambda_1): with W = phi at t = 0 the
  // prefactor is r^3 A
  ModelParams p = test_params(0.1, 1, 1024);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  CHECK(atlas.prefactor(1, 0) ==
        doctest::Approx(std::pow(p.r, 3) * p.A).epsilon(1e-13));

  // N = 2 at the center of bubble 1 against the grid-level kernel value
  const SampledField f = interaction_field(atlas, 1, 2, InteractionSign::BelowK);
  const Grid& g = atlas.ref_grid();
  const int ic = g.nearest(1.0);
  const double eta = g.point(ic) * atlas.lambda(1) / atlas.lambda(0);
  const double direct = atlas.prefactor(0, 2) *
                        hilbert_derivative_at(atlas.profiles[0], eta, 2);
  CHECK(f.values[ic] == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("interaction_field near x = 0 approaches the coupling sum") {
  // d2 H B_-(x -> 0) = sum_{j<k} x_j^2 (r/A)^j a_j under the (c,d) = (4,3)
  // scaling; the reference-grid center of bubble k maps near 0
  ModelParams p = test_params(0.05, 3, 1024);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const int k = 3;
  double expect = 0.0;
  for (int j = 0; j < k; ++j)
    expect += std::pow(atlas.cascade.x[j], 2) * std::pow(atlas.ratio(), j) * seed.delta0;
  const SampledField f = interaction_field(atlas, k, 2, InteractionSign::BelowK);
  const Grid& g = atlas.ref_grid();
  const int ic = g.nearest(1.0);  // eta = lambda_k/lambda_j . 1 ~ r^{k-j}, near 0
  CHECK(f.values[ic] == doctest::Approx(expect).epsilon(2e-2));
}

TEST_CASE("cascade degeneracy raises when supports lose nesting") {
  ModelParams p = test_params(0.05, 1, 512);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  atlas.cascade.x[1] = atlas.cascade.x[0] * 30.0;  // push lambda_1 into bubble 0's band
  CHECK_THROWS_AS(interaction_field(atlas, 1, 2, InteractionSign::All),
                  CascadeDegeneracyError);
}

TEST_CASE("evaluate: zero outside supports, prefactor collapse at peaks") {
  ModelParams p = test_params(0.05, 2, 1024);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const std::vector<double> far = evaluate(atlas, {100.0, -55.0, 3.7}, 0);
  for (double v : far) CHECK(v == 0.0);

  const PeakInfo peak = max_d3(atlas);
  const std::vector<double> at_peak = evaluate(atlas, {peak.x_peak}, 3);
  CHECK(std::abs(at_peak[0]) == doctest::Approx(peak.value).epsilon(1e-10));
  CHECK(peak.k == p.n);  // A^k growth puts the peak in the last bubble at t=0
  CHECK_THROWS_AS(evaluate(atlas, {0.5}, 5), UnsupportedOrderError);
}

TEST_CASE("evaluate: two-bubble sum against direct summation on a fine set") {
  ModelParams p = test_params(0.1, 1, 2048);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  std::vector<double> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(-1.4 + 2.8 * i / 200.0);
  const std::vector<double> got = evaluate(atlas, pts, 0);
  double err = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    double want = 0;
    for (int k = 0; k <= 1; ++k)
      want += std::pow(p.r, 3 * k) * std::pow(p.A, k) *
              seed_value(pts[i] / std::pow(p.r, k), p.r);
    err = std::max(err, std::abs(got[i] - want));
  }
  // cubic interpolation of the sampled seed vs the exact formula
  CHECK(err <= 5e-5);

  // at bubble-1 in-support nodes the other bubble vanishes identically and
  // the nodal evaluation is exact: roundoff-level agreement
  const Grid& g = atlas.ref_grid();
  double node_err = 0;
  for (int i = 0; i < g.n; ++i) {
    const double xi = g.point(i);
    if (std::abs(std::abs(xi) - 1.0) > p.r) continue;
    const double x = xi * atlas.lambda(1);
    const double got = evaluate(atlas, {x}, 0)[0];
    const double want = std::pow(p.r, 3) * p.A * seed.field.values[i];
    node_err = std::max(node_err, std::abs(got - want));
  }
  CHECK(node_err <= 1e-10);
}

TEST_CASE("oddness of B on symmetric sample grids") {
  ModelParams p = test_params(0.05, 2, 1024);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  std::vector<double> pts, mpts;
  for (int i = 1; i <= 100; ++i) {
    pts.push_back(1.3 * i / 100.0);
    mpts.push_back(-1.3 * i / 100.0);
  }
  const std::vector<double> vp = evaluate(atlas, pts, 0);
  const std::vector<double> vm = evaluate(atlas, mpts, 0);
  for (size_t i = 0; i < pts.size(); ++i)
    CHECK(vp[i] == doctest::Approx(-vm[i]).epsilon(1e-12));
}

TEST_CASE("sobolev_norm: single-bubble L2 scaling and tail ratios") {
  ModelParams p = test_params(0.05, 0, 2048);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  atlas.cascade.x[0] = 1.7;
  const SobolevResult res = sobolev_norm(atlas, 0.0);
  const double phi_l2 = l2_norm(seed.field.values, seed.field.grid.h());
  CHECK(res.value == doctest::Approx(std::pow(1.7, 4.5) * phi_l2).epsilon(1e-6));

  ModelParams p3 = test_params(0.05, 3, 1024);
  BubbleAtlas a3 = initial_atlas(p3, make_seed_profile(p3.r, p3.pts_per_bubble));
  const SobolevResult m3 = sobolev_norm(a3, 3.0);
  CHECK(m3.tail_ratio == doctest::Approx(2.0 * std::sqrt(0.05)).epsilon(1e-12));
  CHECK_FALSE(m3.divergence_warning);
  const SobolevResult m34 = sobolev_norm(a3, 3.5);
  CHECK(m34.divergence_warning);
  const SobolevResult m34b = sobolev_norm(a3, 3.0);
  CHECK(m34b.convergent_m_max == doctest::Approx(3.5 - std::log(2.0) / std::log(20.0)).epsilon(1e-9));
}

TEST_CASE("sobolev_norm m=0 agrees with direct physical-space quadrature") {
  ModelParams p = test_params(0.05, 2, 2048);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const SobolevResult res = sobolev_norm(atlas, 0.0);
  // trapezoid in physical coordinates over each bubble block
  const Grid& g = atlas.ref_grid();
  double sum2 = 0;
  for (int k = 0; k <= p.n; ++k) {
    const double lam = atlas.lambda(k);
    std::vector<double> pts(g.n);
    for (int i = 0; i < g.n; ++i) pts[i] = g.point(i) * lam;
    const std::vector<double> v = evaluate(atlas, pts, 0);
    double s = 0;
    for (int i = 0; i < g.n; ++i) s += v[i] * v[i];
    sum2 += s * g.h() * lam;
  }
  CHECK(res.value == doctest::Approx(std::sqrt(sum2)).epsilon(1e-8));
}

TEST_CASE("tail_report: windows excluding small bubbles give zero distance") {
  ModelParams p = test_params(0.05, 4, 512);
  SeedProfile seed = make_seed_profile(p.r, p.pts_per_bubble);
  BubbleAtlas atlas = initial_atlas(p, seed);
  const TailReport rep = tail_report(atlas, 2);
  // supports of k >= 1 live inside |x| <= 1.1 r < 1/2
  for (size_t i = 0; i < rep.truncations.size(); ++i)
    if (rep.truncations[i] >= 1) CHECK(rep.cN_distance[i] <= 1e-12);
  CHECK(rep.h3_tail_ratio_measured ==
        doctest::Approx(rep.h3_tail_ratio_expected).epsilon(1e-6));
  CHECK(rep.geometric_decay);
}
