#pragma once

#include <string>
#include <vector>

#include "cosafed/config.hpp"
#include "cosafed/engine.hpp"

namespace cosafed {

struct SummaryRow {
  std::string group;   // partition mode
  std::string method;
  int clients_per_round = 0;
  int rounds = 0;
  double epsilon = 0.0;
  double total_privacy_budget = 0.0;
  double best_acc = 0.0;  // fraction
  bool failed = false;
  std::string error;
};

/// |total_a - total_b| / total_b.
double relative_difference_ratio(double total_a, double total_b);

/// Writes metrics.csv (one data row per round), summary.txt (flat
/// key=value) and the three gnuplot-style x,y plot files. Floats printed
/// with 6 significant digits.
void emit_metrics(const std::vector<RoundRecord>& records,
                  const SummaryRow& summary, const std::string& out_dir);

SummaryRow summarize(const ExperimentConfig& cfg, const TrainingResult& result);

/// Expands a grid file: plain config keys plus comma-separated
/// epsilon_list / clients_per_round_list / partition_list, crossed in
/// listed order.
std::vector<ExperimentConfig> expand_grid(const std::string& grid_path);

/// Runs every config (each into its own out_dir subdirectory), writes
/// summary.csv once; a failed run becomes a failed row and the matrix
/// continues.
std::vector<SummaryRow> run_matrix(const std::vector<ExperimentConfig>& grid,
                                   const std::string& out_dir);

/// Reads total_privacy_budget back from an emitted summary.txt.
double read_summary_total(const std::string& summary_path);

}  // namespace cosafed
