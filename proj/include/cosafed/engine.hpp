#pragma once

#include <cstdint>
#include <vector>

#include "cosafed/adjuster.hpp"
#include "cosafed/config.hpp"
#include "cosafed/data.hpp"
#include "cosafed/dp.hpp"
#include "cosafed/model.hpp"

namespace cosafed {

// One training round: select clients, train locally, adjust the budget per
// client, scale + noise + upload, aggregate, evaluate. Per-client work may
// run on several workers; ledger writes and aggregation happen at a single
// barrier in client-id order, so results depend on (config, seed) only.

struct ClientUpload {
  int client_id = 0;
  ParamVector noised_update;   // Q
  double epsilon_spent = 0.0;
  double weight = 0.0;         // client dataset size
  double coefficient = 1.0;    // budget multiplier applied to epsilon
  double score_total = 0.0;    // 0 for strategies without scoring
  double cos_sim = 0.0;        // scaling factor actually applied
  double noise_scale = 0.0;    // Laplace scale used; 0 when noise disabled
};

struct RoundRecord {
  int round = 0;
  std::vector<int> selected;
  std::vector<double> epsilons;      // per client, same order as selected
  std::vector<double> coefficients;
  std::vector<double> noise_scales;
  double accuracy = 0.0;  // test-set metrics after aggregation
  double loss = 0.0;
  double round_budget = 0.0;
  double cumulative_budget = 0.0;
  double mean_coefficient = 0.0;
  double mean_score = 0.0;
};

struct GlobalState {
  int round = 1;
  ParamVector model;       // A^{t-1} at the start of round t
  ParamVector prev_model;  // A^{t-2}; consumed by the cosine-only strategy
  std::vector<double> acc_history;   // exactly round-1 entries
  std::vector<double> loss_history;
  PrivacyLedger ledger;
};

struct UploadOptions {
  bool noise = true;
  bool force_unit_scaling = false;
  bool clip = false;
};

/// Uniform N-subset of [0, M), deterministic in (master_seed, round).
std::vector<int> select_clients(int total_clients, int selected_clients,
                                int round, std::uint64_t master_seed);

/// global_prev - local, coordinatewise.
ParamVector compute_update(const ParamVector& global_prev,
                           const ParamVector& local);

/// Scales the update by cos(global_prev, local), adds Laplace noise at
/// scale sensitivity / epsilon_prime, and returns the upload. The caller
/// records the ledger entry at the aggregation barrier.
ClientUpload make_upload(const ParamVector& global_prev,
                         const ParamVector& local,
                         const AdjustedBudget& budget,
                         const BudgetParams& dp, int client_id, double weight,
                         RngStream& rng, const UploadOptions& opts);

/// A^t = A^{t-1} - sum_i w_i Q_i with w_i = weight_i / sum weights, summed
/// in ascending client-id order.
ParamVector aggregate(const ParamVector& global_prev,
                      const std::vector<ClientUpload>& uploads);

/// Raises a degenerate budget onto the configured floor.
double apply_epsilon_floor(double epsilon_prime, double floor);

RoundRecord run_round(GlobalState& state, const ExperimentConfig& cfg,
                      const Dataset& train, const Partition& partition,
                      const Dataset& test);

struct TrainingResult {
  ParamVector final_model;
  std::vector<RoundRecord> records;
  PrivacyLedger ledger;
};

TrainingResult run_training(const ExperimentConfig& cfg, const Dataset& train,
                            const Dataset& test);

}  // namespace cosafed
