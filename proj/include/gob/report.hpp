#pragma once

#include <string>

namespace gob {

// Aggregates a results directory produced by `run`: writes aggregate.csv
// (per-round mean and standard error of the normalized cumulative reward,
// per algorithm at its best alpha), grid.csv when the summary spans a noise
// grid, and one self-contained SVG line chart per noise cell.
struct ReportOptions {
  std::string results_dir;
  int max_points = 400;  // per curve in the SVG
};

void write_report(const ReportOptions& options);

}  // namespace gob
