#include "cosafed/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace cosafed {

namespace {

namespace fs = std::filesystem;

// 6 significant digits everywhere so reruns are byte-identical.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot write '" + path.string() + "'");
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCategory::io,
                "cannot create '" + dir.string() + "': " + ec.message());
  }
}

}  // namespace

double relative_difference_ratio(double total_a, double total_b) {
  if (!(total_b > 0.0)) {
    throw Error(ErrorCategory::param,
                "relative_difference_ratio: reference total must be > 0");
  }
  return std::abs(total_a - total_b) / total_b;
}

SummaryRow summarize(const ExperimentConfig& cfg,
                     const TrainingResult& result) {
  SummaryRow row;
  row.group = to_string(cfg.partition);
  row.method = to_string(cfg.method);
  row.clients_per_round = cfg.clients_per_round;
  row.rounds = cfg.rounds;
  row.epsilon = cfg.epsilon;
  row.total_privacy_budget = result.ledger.total();
  for (const auto& r : result.records) {
    row.best_acc = std::max(row.best_acc, r.accuracy);
  }
  return row;
}

void emit_metrics(const std::vector<RoundRecord>& records,
                  const SummaryRow& summary, const std::string& out_dir) {
  const fs::path dir(out_dir);
  ensure_dir(dir);

  auto csv = open_out(dir / "metrics.csv");
  csv << "round,accuracy,loss,round_budget_total,cumulative_budget,mean_p,"
         "mean_score\n";
  for (const auto& r : records) {
    csv << r.round << ',' << fmt(r.accuracy) << ',' << fmt(r.loss) << ','
        << fmt(r.round_budget) << ',' << fmt(r.cumulative_budget) << ','
        << fmt(r.mean_coefficient) << ',' << fmt(r.mean_score) << '\n';
  }

  auto sum = open_out(dir / "summary.txt");
  sum << "group = " << summary.group << '\n'
      << "method = " << summary.method << '\n'
      << "clients_per_round = " << summary.clients_per_round << '\n'
      << "rounds = " << summary.rounds << '\n'
      << "epsilon = " << fmt(summary.epsilon) << '\n'
      << "total_privacy_budget = " << fmt(summary.total_privacy_budget) << '\n'
      << "best_acc = " << fmt(summary.best_acc) << '\n';

  auto acc = open_out(dir / "accuracy_vs_round.dat");
  auto loss = open_out(dir / "loss_vs_round.dat");
  auto budget = open_out(dir / "budget_vs_round.dat");
  for (const auto& r : records) {
    acc << r.round << ' ' << fmt(r.accuracy) << '\n';
    loss << r.round << ' ' << fmt(r.loss) << '\n';
    // per-client mean budget, the quantity the budget curves track
    const double clients = r.epsilons.empty()
                               ? 1.0
                               : static_cast<double>(r.epsilons.size());
    budget << r.round << ' ' << fmt(r.round_budget / clients) << '\n';
  }
}

std::vector<ExperimentConfig> expand_grid(const std::string& grid_path) {
  std::ifstream in(grid_path);
  if (!in) {
    throw Error(ErrorCategory::config,
                "cannot open grid '" + grid_path + "'");
  }
  auto kv = parse_kv_lines(in, grid_path);

  const auto take_list = [&kv](const std::string& key) {
    std::vector<std::string> values;
    const auto it = kv.find(key);
    if (it == kv.end()) return values;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) values.push_back(item.substr(b, e - b + 1));
    }
    kv.erase(it);
    return values;
  };

  auto partitions = take_list("partition_list");
  auto epsilons = take_list("epsilon_list");
  auto client_counts = take_list("clients_per_round_list");
  if (partitions.empty()) partitions = {""};
  if (epsilons.empty()) epsilons = {""};
  if (client_counts.empty()) client_counts = {""};

  const ExperimentConfig base = parse_config_kv(kv);
  std::vector<ExperimentConfig> grid;
  for (const auto& partition : partitions) {
    for (const auto& epsilon : epsilons) {
      for (const auto& n : client_counts) {
        std::map<std::string, std::string> overrides;
        if (!partition.empty()) overrides["partition"] = partition;
        if (!epsilon.empty()) overrides["epsilon"] = epsilon;
        if (!n.empty()) overrides["clients_per_round"] = n;
        ExperimentConfig cfg = apply_overrides(base, overrides);
        validate_config(cfg);
        grid.push_back(std::move(cfg));
      }
    }
  }
  return grid;
}

namespace {

std::string run_name(const ExperimentConfig& cfg) {
  std::ostringstream name;
  name << to_string(cfg.method) << '_' << to_string(cfg.partition) << "_eps"
       << fmt(cfg.epsilon) << "_n" << cfg.clients_per_round;
  return name.str();
}

}  // namespace

std::vector<SummaryRow> run_matrix(const std::vector<ExperimentConfig>& grid,
                                   const std::string& out_dir) {
  if (grid.empty()) {
    throw Error(ErrorCategory::config, "run_matrix: empty grid");
  }
  ensure_dir(out_dir);

  std::map<std::string, std::pair<Dataset, Dataset>> data_cache;
  const auto datasets = [&data_cache](const ExperimentConfig& cfg)
      -> const std::pair<Dataset, Dataset>& {
    auto it = data_cache.find(cfg.data_dir);
    if (it == data_cache.end()) {
      const fs::path dir(cfg.data_dir);
      Dataset train = load_idx((dir / "train-images-idx3-ubyte.gz").string(),
                               (dir / "train-labels-idx1-ubyte.gz").string(),
                               "train");
      Dataset test = load_idx((dir / "t10k-images-idx3-ubyte.gz").string(),
                              (dir / "t10k-labels-idx1-ubyte.gz").string(),
                              "test");
      it = data_cache
               .emplace(cfg.data_dir,
                        std::make_pair(std::move(train), std::move(test)))
               .first;
    }
    return it->second;
  };

  std::vector<SummaryRow> rows;
  rows.reserve(grid.size());
  for (const auto& base_cfg : grid) {
    ExperimentConfig cfg = base_cfg;
    cfg.out_dir = (fs::path(out_dir) / run_name(cfg)).string();
    SummaryRow row;
    try {
      const auto& [train, test] = datasets(cfg);
      ensure_dir(cfg.out_dir);
      open_out(fs::path(cfg.out_dir) / "run.log") << echo_config(cfg);
      const TrainingResult result = run_training(cfg, train, test);
      row = summarize(cfg, result);
      emit_metrics(result.records, row, cfg.out_dir);
      std::cout << run_name(cfg) << ": total=" << fmt(row.total_privacy_budget)
                << " best_acc=" << fmt(row.best_acc) << '\n';
    } catch (const Error& e) {
      row.group = to_string(cfg.partition);
      row.method = to_string(cfg.method);
      row.clients_per_round = cfg.clients_per_round;
      row.rounds = cfg.rounds;
      row.epsilon = cfg.epsilon;
      row.failed = true;
      row.error = e.what();
      std::cout << run_name(cfg) << ": FAILED (" << e.what() << ")\n";
    }
    rows.push_back(std::move(row));
  }

  auto table = open_out(fs::path(out_dir) / "summary.csv");
  table << "group,method,clients_per_round,rounds,epsilon,"
           "total_privacy_budget,best_acc,status\n";
  for (const auto& row : rows) {
    table << row.group << ',' << row.method << ',' << row.clients_per_round
          << ',' << row.rounds << ',' << fmt(row.epsilon) << ','
          << fmt(row.total_privacy_budget) << ',' << fmt(row.best_acc) << ','
          << (row.failed ? "error" : "ok") << '\n';
  }
  return rows;
}

double read_summary_total(const std::string& summary_path) {
  std::ifstream in(summary_path);
  if (!in) {
    throw Error(ErrorCategory::io,
                "cannot open summary '" + summary_path + "'");
  }
  const auto kv = parse_kv_lines(in, summary_path);
  const auto it = kv.find("total_privacy_budget");
  if (it == kv.end()) {
    throw Error(ErrorCategory::data,
                summary_path + ": missing total_privacy_budget");
  }
  return std::stod(it->second);
}

}  // namespace cosafed
