#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "cosafed/data.hpp"
#include "cosafed/model.hpp"

namespace cosafed {

/// Budget strategy for a run. CosAFed is the adaptive method; the other
/// three are the simplified comparator strategies.
enum class Method { CosAFed, FixedBudget, ScoreFixedP, CosineOnly };

Method parse_method(const std::string& name);
const char* to_string(Method m) noexcept;

struct ExperimentConfig {
  Method method = Method::CosAFed;
  double epsilon = 100.0;
  double sensitivity = 1.0;
  int total_clients = 100;    // M
  int clients_per_round = 3;  // N
  int rounds = 350;           // T
  PartitionMode partition = PartitionMode::Equal;
  std::uint64_t partition_seed = 1;
  int min_partition_size = 100;  // random partition floor
  double lr = 0.05;
  int local_epochs = 1;
  int batch_size = 64;
  std::uint64_t seed = 42;  // master seed; all streams derive from it
  std::string out_dir = "out";
  std::string data_dir = "data/mnist";
  double epsilon_floor = -1.0;  // < 0: materialized to 1e-3 * epsilon
  bool clip = false;            // L1-clip updates to sensitivity pre-scaling
  bool noise = true;            // test hook: disable the noise term
  bool force_unit_scaling = false;  // test hook: scaling factor := 1
  ModelInit init = ModelInit::Zero;
  int workers = 1;              // per-client parallelism within a round
  double score_fixed_p = 0.9;   // constant p of the score_fixed_p strategy
};

/// Parses the flat key=value config format ('#' comments, blank lines
/// allowed). Unknown keys and constraint violations name the field.
ExperimentConfig parse_config_file(const std::string& path);

/// Same, from an already-collected key/value map (CLI overrides merge
/// into the file's map before this call).
ExperimentConfig parse_config_kv(const std::map<std::string, std::string>& kv);

/// Reads key = value lines ('#' comments); `origin` labels parse errors.
std::map<std::string, std::string> parse_kv_lines(std::istream& in,
                                                  const std::string& origin);

/// Overlays key=value pairs onto an existing config.
ExperimentConfig apply_overrides(ExperimentConfig base,
                                 const std::map<std::string, std::string>& kv);

void validate_config(const ExperimentConfig& cfg);

/// All fields with defaults materialized, one key=value per line (echoed
/// to the run log).
std::string echo_config(const ExperimentConfig& cfg);

/// epsilon_floor with the default materialized: 1e-3 * epsilon.
double materialized_epsilon_floor(const ExperimentConfig& cfg);

}  // namespace cosafed
