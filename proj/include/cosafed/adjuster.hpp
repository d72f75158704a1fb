#pragma once

#include <span>

#include "cosafed/types.hpp"

namespace cosafed {

// Per-round, per-client privacy-budget adjustment: an adjustment
// coefficient from cosine similarity and dataset proportions, a weighted
// three-part score over loss trend / accuracy trend / training progress,
// and the final budget judgment. Pure functions; enforced bounds:
//   coefficient in [0, max(1, M-1)]
//   score total in [60/T, 100]
//   epsilon_prime in [0, epsilon]

struct ScoreBreakdown {
  int score_loss = 0;    // 0 or 1
  int score_acc = 0;     // 0 or 1
  double score_t = 0.0;  // in [2/T, 1]
  double total = 0.0;    // 30*score_loss + 40*score_acc + 30*score_t
};

struct AdjustedBudget {
  double epsilon_prime = 0.0;
  double coefficient = 0.0;  // the p that produced it
  ScoreBreakdown score;
  bool reduced = false;  // epsilon_prime == coefficient * epsilon
};

/// Histories are indexed by round: history[r-1] is the metric saved after
/// round r, so at the start of round t both spans hold t-1 entries.
struct AdjustmentInput {
  double cos_sim = 0.0;
  int total_clients = 0;               // M
  int selected_clients = 0;            // N
  long long client_dataset_size = 0;   // |D_i|
  long long total_dataset_size = 0;    // |D|
  int round = 0;                       // t, 1-based
  int total_rounds = 0;                // T
  std::span<const double> acc_history;
  std::span<const double> loss_history;
  double epsilon = 0.0;
};

/// p = 1 when cos_sim < 0, else |1 - cos_sim * (M/N) * (D_i/D)|.
double adjustment_coefficient(double cos_sim, int total_clients,
                              int selected_clients,
                              long long client_dataset_size,
                              long long total_dataset_size);

/// 1 when the loss of round t-1 >= loss of round t-2; 0 otherwise, and 0
/// when fewer than two completed rounds exist.
int score_loss(std::span<const double> loss_history, int round);

/// Mean of the up-to-N most recent completed-round accuracies ending at
/// round t-1, compared against acc_{t-1}; 0 on empty history.
int score_acc(std::span<const double> acc_history, int round,
              int selected_clients);

/// 2t/T while t/T <= 1/2, else 1.
double score_round(int round, int total_rounds);

ScoreBreakdown total_score(int loss_score, int acc_score, double round_score);

/// epsilon' = p * epsilon when total > 50 (strict) and p <= 1 (inclusive);
/// otherwise epsilon stays.
AdjustedBudget adjust_budget(double epsilon, double coefficient,
                             const ScoreBreakdown& score);

/// The full adjustment pipeline in order: coefficient, three sub-scores,
/// weighted total, judgment.
AdjustedBudget adjust(const AdjustmentInput& input);

}  // namespace cosafed
