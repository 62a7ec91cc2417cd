#pragma once

#include <map>
#include <string>
#include <vector>

#include "emhd/atlas.hpp"
#include "emhd/cascade.hpp"
#include "emhd/diagnostics.hpp"
#include "emhd/profile_dynamics.hpp"

namespace emhd {

// Field CSV: comment header with grid metadata, then x,value rows.
void write_field_csv(const SampledField& f, const std::string& path);
SampledField read_field_csv(const std::string& path);

// Trajectory CSV: t, x_0..x_n, a_0..a_n.
void write_trajectory_csv(const CascadeTrajectory& traj, const std::string& path);

// Monitor CSV: t, max_h4, sqrtE_over_t, E1..E8 ratio columns.
void write_monitor_csv(const std::vector<MonitorRow>& rows, const std::string& path);

// Atlas checkpoint: JSON manifest (params, t, x_k) plus per-bubble field CSVs.
void write_atlas_checkpoint(const BubbleAtlas& atlas, const std::string& dir,
                            const std::string& tag);
BubbleAtlas read_atlas_checkpoint(const std::string& dir, const std::string& tag);

// Deterministic 16-hex run id from the canonical manifest content.
std::string run_id_from(const std::string& canonical);

std::string params_to_json(const ModelParams& p);
ModelParams params_from_json(const std::string& text);

struct DiffReport {
  bool schema_ok = true;
  bool config_changed = false;       // parameter-level differences
  std::vector<std::string> config_diffs;
  double max_rel_numeric = 0.0;      // worst relative numeric deviation
  std::vector<std::string> numeric_diffs;  // entries beyond tolerance
  bool within_tol = true;
};

// Numeric diff of two run directories via their manifests.
DiffReport diff_runs(const std::string& manifest_a, const std::string& manifest_b,
                     double rel_tol);

// Minimal SVG line/scatter plot (log-log optional).
struct PlotSeries {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool line = true;
};
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, bool loglog);

}  // namespace emhd
