#pragma once

#include <string>
#include <vector>

#include "emhd/config.hpp"

namespace emhd {

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 2 monitor failure, 3 config error, 4 numerical breakdown
  std::vector<std::string> failures;
  std::string manifest_path;
};

// Executes the selected mode end-to-end and writes manifest, time-series
// CSVs, DiagnosticsReport JSON and SVG plots under cfg.output.dir.
RunOutcome run(const RunConfig& cfg);

}  // namespace emhd
