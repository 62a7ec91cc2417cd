#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emhd/cascade.hpp"

using namespace emhd;

TEST_CASE("solve_root: frozen values and Lemma bounds") {
  // bisection oracle on g(a) = A(1-e^{-a}) - a over [1e-9, 2A]
  CHECK(solve_root(2.0) == doctest::Approx(1.593624260040040).epsilon(1e-12));
  CHECK(solve_root(1.5) == doctest::Approx(0.874217465798717).epsilon(1e-12));
  for (double A : {1.1, 1.2, 1.5, 2.0, 3.0, 5.0}) {
    const double a = solve_root(A);
    CHECK(std::abs(A * (1 - std::exp(-a)) - a) <= 1e-12);
    CHECK(a > std::log(A));
    CHECK(a < 2 * (A - 1));
  }
  CHECK_THROWS_AS(solve_root(1.0), ConfigError);
  CHECK_THROWS_AS(solve_root(0.7), ConfigError);
}

TEST_CASE("params validation names the violated inequality") {
  CascadeParams p;
  p.A = 2.0;
  p.r = 0.3;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("r in (0, 1/8)"), ConfigError);
  p.r = 0.05;
  p.n = 80;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.n = 10;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("n = 0: x_0 constant under the empty sum") {
  CascadeParams p;
  p.n = 0;
  CascadeState s = initial_cascade_state(p, 1.0);
  CascadeState s2 = step_cascade(s, p, -0.5, s.a);
  CHECK(s2.x[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("n = 1 closed form: x_1(t) = A e^{delta t}") {
  CascadeParams p;
  p.n = 1;
  p.A = 2.0;
  p.delta = 1.0;
  CascadeState s2 = initial_cascade_state(p, 1.0);
  const double t = -0.7;
  for (int i = 0; i < 700; ++i) s2 = step_cascade(s2, p, t / 700, s2.a);
  CHECK(s2.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s2.x[1] == doctest::Approx(2.0 * std::exp(t)).epsilon(1e-9));
}

TEST_CASE("n = 2 ratio decreases backward in time (RK4 oracle frozen)") {
  CascadeParams p;
  p.n = 2;
  p.A = 2.0;
  p.delta = 1.0;
  CascadeState s2 = initial_cascade_state(p, 1.0);
  for (int i = 0; i < 2000; ++i) s2 = step_cascade(s2, p, -1.0 / 2000, s2.a);
  CHECK(s2.x[2] / s2.x[1] < 2.0);
  // RK4 oracle at dt = 1e-4, cross-checked at dt = 1e-5
  CHECK(s2.x[1] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-8));
  CHECK(s2.x[2] == doctest::Approx(0.415635436905).epsilon(1e-8));
  CHECK(s2.x[2] / s2.x[1] == doctest::Approx(0.564907127701).epsilon(1e-8));
}

TEST_CASE("triangularity: bubbles above k never affect x_k") {
  CascadeParams p5;
  p5.n = 5;
  CascadeParams p3;
  p3.n = 3;
  CascadeState a = initial_cascade_state(p5, 0.7);
  CascadeState b = initial_cascade_state(p3, 0.7);
  for (int s = 0; s < 300; ++s) {
    a = step_cascade(a, p5, -0.001, a.a);
    b = step_cascade(b, p3, -0.001, b.a);
  }
  for (int k = 0; k <= 3; ++k)
    CHECK(a.x[k] == doctest::Approx(b.x[k]).epsilon(1e-14));
}

TEST_CASE("backward/forward consistency returns to A^k") {
  CascadeParams p;
  p.n = 8;
  p.A = 2.0;
  const CascadeTrajectory back =
      integrate_cascade(p, initial_cascade_state(p, 1.0), -0.4, 1.0, 50, 1e-6);
  const CascadeTrajectory fwd =
      integrate_cascade(p, back.states.front(), 0.0, 1.0, 50, 1e-6);
  const CascadeState& final = fwd.states.back();
  CHECK(final.t == doctest::Approx(0.0).epsilon(1e-12));
  for (int k = 0; k <= p.n; ++k)
    CHECK(final.x[k] == doctest::Approx(std::pow(2.0, k)).epsilon(1e-8));
}

TEST_CASE("integral sandwich: constant couplings collapse to a/delta") {
  CascadeParams p;
  p.n = 12;
  p.A = 2.0;
  p.delta = 1.0;
  const double a = solve_root(p.A);
  const CascadeTrajectory traj = integrate_cascade(
      p, initial_cascade_state(p, 1.0), -(a * 1.02), 1.0, 400, 1e-8);
  const auto rep = verify_integral_bound(traj, p);
  CHECK(rep.pass_upper);
  CHECK(rep.pass_lower);
  // the window-independent identity u_{n+1} = A(1-e^{-u_n}) makes the
  // integral exactly a/delta at delta = 1
  CHECK(rep.integral == doctest::Approx(a).epsilon(5e-4));
}

TEST_CASE("integral sandwich flags a violating trajectory") {
  CascadeParams p;
  p.n = 4;
  p.A = 2.0;
  p.delta = 1.0;
  const double a = solve_root(p.A);
  CascadeTrajectory traj = integrate_cascade(
      p, initial_cascade_state(p, 1.0), -(a * 1.02), 1.0, 300, 1e-8);
  for (auto& s : traj.states)
    for (auto& x : s.x) x *= 2.0;  // constructed counterexample
  const auto rep = verify_integral_bound(traj, p);
  CHECK_FALSE(rep.pass_upper);
}

TEST_CASE("coverage error when the trajectory is too short") {
  CascadeParams p;
  p.n = 2;
  const CascadeTrajectory traj =
      integrate_cascade(p, initial_cascade_state(p, 1.0), -0.3, 1.0, 200, 1e-8);
  CHECK_THROWS_AS(verify_integral_bound(traj, p), CoverageError);
}

TEST_CASE("ratio monotonicity holds on coupled runs and flags injected negatives") {
  CascadeParams p;
  p.n = 10;
  p.A = 2.0;
  const CascadeTrajectory traj =
      integrate_cascade(p, initial_cascade_state(p, 1.0), -1.0, 1.0, 100, 1e-8);
  const auto rep = ratio_monotonicity(traj);
  CHECK(rep.pass);
  CHECK(rep.worst_violation >= -1e-10);

  // negative couplings break the hypothesis: reported, not thrown
  CascadeTrajectory bad = traj;
  for (size_t i = 0; i < bad.states.size(); ++i) {
    const double t = bad.states[i].t;
    for (int k = 0; k <= p.n; ++k)
      bad.states[i].x[k] = std::pow(2.0, k) * std::exp((k % 2 ? -1.0 : 1.0) * t);
  }
  const auto rep2 = ratio_monotonicity(bad);
  CHECK_FALSE(rep2.pass);
}

TEST_CASE("positivity guard rejects and stiffness error surfaces") {
  CascadeParams p;
  p.n = 1;
  CascadeState s = initial_cascade_state(p, 1.0);
  std::vector<double> huge(p.n + 1, 1e14);
  CHECK_THROWS_AS(step_cascade(s, p, -1.0, huge), StiffnessError);
}
