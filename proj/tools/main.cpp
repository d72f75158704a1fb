#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "cosafed/experiments.hpp"

namespace {

int exit_code(cosafed::ErrorCategory category) {
  switch (category) {
    case cosafed::ErrorCategory::config: return 2;
    case cosafed::ErrorCategory::param: return 3;
    case cosafed::ErrorCategory::data: return 4;
    case cosafed::ErrorCategory::train: return 5;
    case cosafed::ErrorCategory::ledger: return 6;
    case cosafed::ErrorCategory::io: return 7;
  }
  return 1;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Overrides {
  std::string method, partition, out_dir, data_dir;
  double epsilon = -1.0;
  int clients_per_round = -1, clients = -1, rounds = -1;
  long long seed = -1;

  std::map<std::string, std::string> to_kv() const {
    std::map<std::string, std::string> kv;
    if (!method.empty()) kv["method"] = method;
    if (!partition.empty()) kv["partition"] = partition;
    if (!out_dir.empty()) kv["out_dir"] = out_dir;
    if (!data_dir.empty()) kv["data_dir"] = data_dir;
    if (epsilon >= 0) kv["epsilon"] = fmt(epsilon);
    if (clients_per_round >= 0) {
      kv["clients_per_round"] = std::to_string(clients_per_round);
    }
    if (clients >= 0) kv["clients"] = std::to_string(clients);
    if (rounds >= 0) kv["rounds"] = std::to_string(rounds);
    if (seed >= 0) kv["seed"] = std::to_string(seed);
    return kv;
  }
};

void add_override_flags(CLI::App& cmd, Overrides& ov) {
  cmd.add_option("--method", ov.method,
                 "cosafed | fixed_budget | score_fixed_p | cosine_only");
  cmd.add_option("--epsilon", ov.epsilon, "initial per-client round budget");
  cmd.add_option("--clients-per-round", ov.clients_per_round,
                 "clients selected each round");
  cmd.add_option("--clients", ov.clients, "total client count");
  cmd.add_option("--rounds", ov.rounds, "training rounds");
  cmd.add_option("--partition", ov.partition, "equal | random");
  cmd.add_option("--seed", ov.seed, "master seed");
  cmd.add_option("--out-dir", ov.out_dir, "output directory");
  cmd.add_option("--data-dir", ov.data_dir, "directory with the IDX files");
}

cosafed::ExperimentConfig load_config(const std::string& config_path,
                                      const Overrides& ov) {
  cosafed::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = cosafed::parse_config_file(config_path);
  }
  cfg = cosafed::apply_overrides(cfg, ov.to_kv());
  cosafed::validate_config(cfg);
  return cfg;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
  namespace fs = std::filesystem;
  const auto cfg = load_config(config_path, ov);
  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "run.log");
  log << cosafed::echo_config(cfg);

  const fs::path data(cfg.data_dir);
  const auto train =
      cosafed::load_idx((data / "train-images-idx3-ubyte.gz").string(),
                        (data / "train-labels-idx1-ubyte.gz").string(),
                        "train");
  const auto test =
      cosafed::load_idx((data / "t10k-images-idx3-ubyte.gz").string(),
                        (data / "t10k-labels-idx1-ubyte.gz").string(), "test");

  const auto result = cosafed::run_training(cfg, train, test);
  const auto summary = cosafed::summarize(cfg, result);
  cosafed::emit_metrics(result.records, summary, cfg.out_dir);
  std::cout << "method=" << summary.method << " group=" << summary.group
            << " rounds=" << summary.rounds
            << " total_privacy_budget=" << fmt(summary.total_privacy_budget)
            << " best_acc=" << fmt(summary.best_acc) << '\n'
            << "outputs in " << cfg.out_dir << '\n';
  return 0;
}

int cmd_matrix(const std::string& grid_path, const std::string& out_dir) {
  auto grid = cosafed::expand_grid(grid_path);
  for (auto& cfg : grid) {
    if (!out_dir.empty()) cfg.out_dir = out_dir;
  }
  const std::string dir = out_dir.empty() ? grid.front().out_dir : out_dir;
  const auto rows = cosafed::run_matrix(grid, dir);
  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.failed ? 1 : 0;
  std::cout << rows.size() << " runs, " << failed << " failed; summary in "
            << dir << "/summary.csv\n";
  return failed == 0 ? 0 : 5;
}

int cmd_compare(const std::string& candidate,
                const std::vector<std::string>& baselines) {
  const double total_a = cosafed::read_summary_total(candidate);
  std::cout << "candidate " << candidate << ": total=" << fmt(total_a) << '\n';
  for (const auto& baseline : baselines) {
    const double total_b = cosafed::read_summary_total(baseline);
    const double ratio = cosafed::relative_difference_ratio(total_a, total_b);
    std::cout << "vs " << baseline << ": total=" << fmt(total_b)
              << " relative_difference_ratio=" << fmt(ratio) << " ("
              << fmt(ratio * 100.0) << "%)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated learning simulator with adaptive privacy budgets"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "key = value config file");
  add_override_flags(*run, ov);

  std::string grid_path, matrix_out;
  auto* matrix = app.add_subcommand("matrix", "run an experiment grid");
  matrix->add_option("grid", grid_path, "grid file")->required();
  matrix->add_option("--out-dir", matrix_out, "output directory");

  std::string candidate;
  std::vector<std::string> baselines;
  auto* compare = app.add_subcommand(
      "compare", "relative difference ratios between summary totals");
  compare->add_option("candidate", candidate, "candidate summary.txt")
      ->required();
  compare->add_option("baselines", baselines, "baseline summary.txt files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, ov);
    if (matrix->parsed()) return cmd_matrix(grid_path, matrix_out);
    if (compare->parsed()) return cmd_compare(candidate, baselines);
  } catch (const cosafed::Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what()
              << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
