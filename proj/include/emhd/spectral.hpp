#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "emhd/grid.hpp"
#include "emhd/params.hpp"

namespace emhd {

// Periodic pseudo-spectral state for the direct solver. The spectrum is
// stored half-complex (r2c layout, Hermitian symmetry implied); modes above
// the 2/3 cutoff are kept identically zero.
struct SpectralState {
  Grid grid;  // periodic, length L = x_max - x_min
  std::vector<std::complex<double>> b_hat;
  double t = 0.0;
  double mu = 0.0;
  double alpha = 2.0;

  int n() const { return grid.n; }
  double L() const { return grid.length(); }
};

SpectralState spectral_from_field(const SampledField& B, double mu = 0.0,
                                  double alpha = 2.0);
SampledField spectral_to_field(const SpectralState& s);

// Raw half-complex helpers (forward normalized by 1/n).
std::vector<std::complex<double>> real_fft(const std::vector<double>& f);
std::vector<double> real_ifft(const std::vector<std::complex<double>>& spec, int n);

// J = -H(dB) with zero mean; HJ = dB holds to spectral accuracy.
SampledField j_from_b(const SampledField& B);

// Spectrum of -2b J B_x + b H(B_xx) B - mu |xi|^alpha B_hat,
// products formed in physical space under 2/3 dealiasing.
std::vector<std::complex<double>> rhs_eval(const SpectralState& state,
                                           const ModelParams& params);

struct SpectralCheckpoint {
  double t = 0.0;
  std::vector<std::complex<double>> b_hat;
};

struct SpectralRunResult {
  SpectralState final_state;
  std::vector<SpectralCheckpoint> checkpoints;  // log-uniform in |t - t0|
  bool blowup_stop = false;    // ||d3 B||_inf crossed 1/(10 dt)
  double stop_time = 0.0;
  double mean_drift = 0.0;     // |mean B(t) - mean B(0)|
  long steps = 0;
};

struct SpectralRunControl {
  double dt = 0.0;             // 0 = automatic from the stability bounds
  double cfl = 1.2;            // fraction of the RK4 imaginary-axis limit
  int checkpoints_per_decade = 8;
  double checkpoint_min = 1e-9;
};

// RK4 with integrating-factor treatment of the dissipation multiplier.
// The mean of B is exactly conserved by the model; asserted numerically.
SpectralRunResult integrate_spectral(const SpectralState& state, const ModelParams& params,
                                     double t_end, const SpectralRunControl& control = {});

// Automatic stable step from the dispersive and advective bounds.
double spectral_dt_bound(const SpectralState& state, const ModelParams& params,
                         double cfl);

}  // namespace emhd
