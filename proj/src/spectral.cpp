#include "emhd/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace emhd {

namespace {

constexpr double kPi = 3.14159265358979323846;
std::mutex spectral_fftw_mutex;

// Cached FFTW plans for one transform size.
class Transformer {
 public:
  explicit Transformer(int n) : n_(n), real_(n), spec_(n / 2 + 1) {
    std::lock_guard<std::mutex> lock(spectral_fftw_mutex);
    fwd_ = fftw_plan_dft_r2c_1d(n, real_.data(),
                                reinterpret_cast<fftw_complex*>(spec_.data()),
                                FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec_.data()),
                                real_.data(), FFTW_ESTIMATE);
  }
  ~Transformer() {
    std::lock_guard<std::mutex> lock(spectral_fftw_mutex);
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Transformer(const Transformer&) = delete;
  Transformer& operator=(const Transformer&) = delete;

  std::vector<std::complex<double>> forward(const std::vector<double>& f) {
    std::copy(f.begin(), f.end(), real_.begin());
    fftw_execute(fwd_);
    std::vector<std::complex<double>> out(spec_);
    const double inv = 1.0 / n_;
    for (auto& c : out) c *= inv;
    return out;
  }
  std::vector<double> backward(const std::vector<std::complex<double>>& s) {
    std::copy(s.begin(), s.end(), spec_.begin());
    fftw_execute(bwd_);
    return real_;
  }

 private:
  int n_;
  std::vector<double> real_;
  std::vector<std::complex<double>> spec_;
  fftw_plan fwd_, bwd_;
};

}  // namespace

std::vector<std::complex<double>> real_fft(const std::vector<double>& f) {
  Transformer tr(static_cast<int>(f.size()));
  return tr.forward(f);
}

std::vector<double> real_ifft(const std::vector<std::complex<double>>& spec, int n) {
  Transformer tr(n);
  return tr.backward(spec);
}

SpectralState spectral_from_field(const SampledField& B, double mu, double alpha) {
  if (!B.grid.power_of_two())
    throw ConfigError("spectral: grid must have a power-of-two point count");
  SpectralState s;
  s.grid = B.grid;
  s.mu = mu;
  s.alpha = alpha;
  Transformer tr(B.grid.n);
  s.b_hat = tr.forward(B.values);
  // enforce dealiasing from the start
  const int cut = B.grid.n / 3;
  for (int k = 0; k < static_cast<int>(s.b_hat.size()); ++k)
    if (k > cut) s.b_hat[k] = 0.0;
  return s;
}

SampledField spectral_to_field(const SpectralState& s) {
  SampledField f = make_field(s.grid);
  Transformer tr(s.grid.n);
  f.values = tr.backward(s.b_hat);
  return f;
}

SampledField j_from_b(const SampledField& B) {
  if (!B.grid.power_of_two())
    throw ConfigError("j_from_b: periodic power-of-two grid required");
  Transformer tr(B.grid.n);
  auto spec = tr.forward(B.values);
  const double k0 = 2.0 * kPi / B.grid.length();
  // J_hat = -|xi| B_hat  (J = -H(dB), zero mean)
  for (size_t k = 0; k < spec.size(); ++k) spec[k] *= -(k0 * k);
  SampledField out = make_field(B.grid);
  out.values = tr.backward(spec);
  return out;
}

std::vector<std::complex<double>> rhs_eval(const SpectralState& state,
                                           const ModelParams& params) {
  const int n = state.n();
  const int nh = n / 2 + 1;
  const int cut = n / 3;
  const double k0 = 2.0 * kPi / state.L();
  Transformer tr(n);

  std::vector<std::complex<double>> bh(state.b_hat);
  for (int k = 0; k < nh; ++k)
    if (k > cut) bh[k] = 0.0;

  std::vector<std::complex<double>> tmp(nh);
  // B, B_x, J = -Lambda B, H(B_xx) = sgn-weighted k^2 B
  const std::vector<double> B = tr.backward(bh);
  for (int k = 0; k < nh; ++k) tmp[k] = bh[k] * std::complex<double>(0.0, k0 * k);
  const std::vector<double> Bx = tr.backward(tmp);
  for (int k = 0; k < nh; ++k) tmp[k] = bh[k] * (-(k0 * k));
  const std::vector<double> J = tr.backward(tmp);
  // H(B_xx): multiplier (-i sgn)(i k)^2 = i k^2 sgn(k) -> i (k0 k)^2 for k > 0
  for (int k = 0; k < nh; ++k)
    tmp[k] = bh[k] * std::complex<double>(0.0, (k0 * k) * (k0 * k));
  const std::vector<double> HBxx = tr.backward(tmp);

  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i)
    rhs[i] = -2.0 * params.b * J[i] * Bx[i] + params.b * HBxx[i] * B[i];

  std::vector<std::complex<double>> out = tr.forward(rhs);
  for (int k = 0; k < nh; ++k) {
    if (k > cut) { out[k] = 0.0; continue; }
    if (state.mu > 0.0) out[k] -= state.mu * std::pow(k0 * k, state.alpha) * bh[k];
    if (!std::isfinite(out[k].real()) || !std::isfinite(out[k].imag()))
      throw NumericalError("rhs_eval: NaN in spectrum at t=" + std::to_string(state.t) +
                           " (blow-up reached?)");
  }
  return out;
}

double spectral_dt_bound(const SpectralState& state, const ModelParams& params,
                         double cfl) {
  const int n = state.n();
  const int cut = n / 3;
  const double k0 = 2.0 * kPi / state.L();
  const double kmax = k0 * cut;
  Transformer tr(n);
  const std::vector<double> B = tr.backward(state.b_hat);
  SampledField Bf = make_field(state.grid);
  Bf.values = B;
  const SampledField J = j_from_b(Bf);
  double bmax = 0.0, jmax = 0.0;
  for (int i = 0; i < n; ++i) {
    bmax = std::max(bmax, std::abs(B[i]));
    jmax = std::max(jmax, std::abs(J.values[i]));
  }
  const double lam = std::abs(params.b) * (bmax * kmax * kmax + 2.0 * jmax * kmax) + 1e-300;
  return cfl * 2.8 / lam;
}

SpectralRunResult integrate_spectral(const SpectralState& state, const ModelParams& params,
                                     double t_end, const SpectralRunControl& control) {
  SpectralRunResult result;
  SpectralState cur = state;
  const int n = cur.n();
  const int nh = n / 2 + 1;
  const double k0 = 2.0 * kPi / cur.L();
  const double t0 = cur.t;
  const bool backward = t_end < t0;
  const double mean0 = cur.b_hat[0].real();
  Transformer tr(n);

  double dt_mag = control.dt > 0 ? control.dt
                                 : spectral_dt_bound(cur, params, control.cfl);
  double dt = backward ? -dt_mag : dt_mag;

  // integrating factor for the dissipation multiplier
  std::vector<double> ifac(nh, 1.0), ifac_h(nh, 1.0);
  auto refresh_ifac = [&]() {
    if (cur.mu <= 0.0) return;
    for (int k = 0; k < nh; ++k) {
      const double m = cur.mu * std::pow(k0 * k, cur.alpha);
      ifac[k] = std::exp(-m * dt);
      ifac_h[k] = std::exp(-m * 0.5 * dt);
    }
  };
  refresh_ifac();

  auto nl_rhs = [&](const SpectralState& s) {
    SpectralState tmp = s;
    tmp.mu = 0.0;  // dissipation handled by the integrating factor
    return rhs_eval(tmp, params);
  };

  double next_cp = control.checkpoint_min;
  const double grow = std::pow(10.0, 1.0 / control.checkpoints_per_decade);
  result.checkpoints.push_back({cur.t, cur.b_hat});

  while (backward ? cur.t > t_end : cur.t < t_end) {
    if (std::abs(dt) < 1e-18)
      break;  // graceful stop near blow-up: step underflow
    if ((backward && cur.t + dt < t_end) || (!backward && cur.t + dt > t_end)) {
      dt = t_end - cur.t;
      refresh_ifac();
    }

    // IF-RK4: v = e^{mu L (t-t0)} b_hat
    const std::vector<std::complex<double>> k1 = nl_rhs(cur);
    SpectralState s2 = cur;
    for (int k = 0; k < nh; ++k)
      s2.b_hat[k] = (cur.b_hat[k] + 0.5 * dt * k1[k]) * ifac_h[k];
    s2.t = cur.t + 0.5 * dt;
    const std::vector<std::complex<double>> k2 = nl_rhs(s2);
    SpectralState s3 = cur;
    for (int k = 0; k < nh; ++k)
      s3.b_hat[k] = cur.b_hat[k] * ifac_h[k] + 0.5 * dt * k2[k];
    s3.t = cur.t + 0.5 * dt;
    const std::vector<std::complex<double>> k3 = nl_rhs(s3);
    SpectralState s4 = cur;
    for (int k = 0; k < nh; ++k)
      s4.b_hat[k] = cur.b_hat[k] * ifac[k] + dt * k3[k] * ifac_h[k];
    s4.t = cur.t + dt;
    const std::vector<std::complex<double>> k4 = nl_rhs(s4);

    for (int k = 0; k < nh; ++k) {
      cur.b_hat[k] = cur.b_hat[k] * ifac[k] +
                     dt / 6.0 *
                         (k1[k] * ifac[k] + 2.0 * (k2[k] + k3[k]) * ifac_h[k] + k4[k]);
    }
    cur.t += dt;
    ++result.steps;

    // blow-up detector: ||d3 B||_inf beyond 1/(10 dt) means the
    // discretization is meaningless past this point
    if (result.steps % 16 == 0) {
      std::vector<std::complex<double>> tmp(nh);
      for (int k = 0; k < nh; ++k) {
        const double kk = k0 * k;
        tmp[k] = cur.b_hat[k] * std::complex<double>(0.0, -kk * kk * kk);
      }
      const std::vector<double> d3 = tr.backward(tmp);
      double m3 = 0.0;
      for (double v : d3) m3 = std::max(m3, std::abs(v));
      if (m3 > 0.1 / std::abs(dt)) {
        result.blowup_stop = true;
        result.stop_time = cur.t;
        break;
      }
    }

    if (std::abs(cur.t - t0) >= next_cp) {
      result.checkpoints.push_back({cur.t, cur.b_hat});
      while (next_cp <= std::abs(cur.t - t0)) next_cp *= grow;
    }
  }

  if (result.checkpoints.back().t != cur.t)
    result.checkpoints.push_back({cur.t, cur.b_hat});
  result.mean_drift = std::abs(cur.b_hat[0].real() - mean0);
  result.final_state = std::move(cur);
  return result;
}

}  // namespace emhd
