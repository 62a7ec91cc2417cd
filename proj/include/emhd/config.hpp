#pragma once

#include <map>
#include <string>

#include "emhd/params.hpp"

namespace emhd {

enum class RunMode { Cascade, Direct, Crosscheck, Diagnose, Root, HilbertSelftest };

RunMode mode_from_string(const std::string& s);
std::string to_string(RunMode m);

struct NumericsConfig {
  int checkpoints_per_decade = 200;
  int ode_n = 30;                 // bubble count for the ODE-only rate phase
  double ode_delta = 1.0;         // constant coupling; <= 0 means use delta0
  double fit_decades_lo = 25.0;   // rate-fit window [A^-lo, A^-hi]
  double fit_decades_hi = 5.0;
  int coupled_steps = 32;
  double crosscheck_window = 1e-4;
  int direct_points = 32768;
  double direct_length = 8.0;
  int probe_per_decade = 6;       // self-similarity probe snapshot cadence
};

struct OutputConfig {
  std::string dir = "out";
  bool plots = true;
  bool goldens = false;
};

struct RunConfig {
  ModelParams params;
  RunMode mode = RunMode::Cascade;
  NumericsConfig numerics;
  OutputConfig output;
  unsigned seed = 2024;

  void validate() const { params.validate(); }
};

// TOML subset ([section], key = value scalars) or a JSON mirror; the format
// is detected from the content.
RunConfig load_config(const std::string& path);
RunConfig config_from_text(const std::string& text);

// Dotted-path override, e.g. "params.A=2.5" or "numerics.ode_n=20".
void apply_override(RunConfig& cfg, const std::string& keyval);

std::string config_to_json(const RunConfig& cfg);

}  // namespace emhd
