#include "cosafed/adjuster.hpp"

#include <cmath>

namespace cosafed {

double adjustment_coefficient(double cos_sim, int total_clients,
                              int selected_clients,
                              long long client_dataset_size,
                              long long total_dataset_size) {
  if (selected_clients < 1 || total_dataset_size < 1) {
    throw Error(ErrorCategory::param,
                "adjustment_coefficient: N and D must be >= 1");
  }
  if (total_clients < selected_clients ||
      client_dataset_size > total_dataset_size || client_dataset_size < 1) {
    throw Error(ErrorCategory::param,
                "adjustment_coefficient: require N <= M and 1 <= D_i <= D");
  }
  if (cos_sim < 0.0) return 1.0;
  // left-to-right product of the three factors
  const double product =
      cos_sim *
      (static_cast<double>(total_clients) / static_cast<double>(selected_clients)) *
      (static_cast<double>(client_dataset_size) /
       static_cast<double>(total_dataset_size));
  return std::abs(1.0 - product);
}

int score_loss(std::span<const double> loss_history, int round) {
  if (round < 1) {
    throw Error(ErrorCategory::param, "score_loss: round must be >= 1");
  }
  // compares the losses of rounds t-1 and t-2; keep 0 while fewer than two
  // completed rounds exist (early training keeps the full budget)
  const int completed = std::min<int>(round - 1,
                                      static_cast<int>(loss_history.size()));
  if (completed < 2) return 0;
  return loss_history[completed - 1] >= loss_history[completed - 2] ? 1 : 0;
}

int score_acc(std::span<const double> acc_history, int round,
              int selected_clients) {
  if (round < 1 || selected_clients < 1) {
    throw Error(ErrorCategory::param,
                "score_acc: round and N must be >= 1");
  }
  const int completed = std::min<int>(round - 1,
                                      static_cast<int>(acc_history.size()));
  if (completed < 1) return 0;
  // window = up to N most recent completed rounds, ending at round t-1
  const int window = std::min(selected_clients, completed);
  double sum = 0.0;
  for (int k = completed - window; k < completed; ++k) sum += acc_history[k];
  const double mean = sum / static_cast<double>(window);
  return mean >= acc_history[completed - 1] ? 1 : 0;
}

double score_round(int round, int total_rounds) {
  if (round < 1 || total_rounds < 1 || round > total_rounds) {
    throw Error(ErrorCategory::param,
                "score_round: require 1 <= t <= T");
  }
  const double ratio = static_cast<double>(round) /
                       static_cast<double>(total_rounds);
  return ratio <= 0.5 ? 2.0 * ratio : 1.0;
}

ScoreBreakdown total_score(int loss_score, int acc_score, double round_score) {
  ScoreBreakdown score;
  score.score_loss = loss_score;
  score.score_acc = acc_score;
  score.score_t = round_score;
  score.total = 30.0 * loss_score + 40.0 * acc_score + 30.0 * round_score;
  return score;
}

AdjustedBudget adjust_budget(double epsilon, double coefficient,
                             const ScoreBreakdown& score) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCategory::param, "adjust_budget: epsilon must be > 0");
  }
  if (coefficient < 0.0) {
    throw Error(ErrorCategory::param, "adjust_budget: coefficient must be >= 0");
  }
  AdjustedBudget budget;
  budget.coefficient = coefficient;
  budget.score = score;
  budget.reduced = score.total > 50.0 && coefficient <= 1.0;
  budget.epsilon_prime = budget.reduced ? coefficient * epsilon : epsilon;
  return budget;
}

AdjustedBudget adjust(const AdjustmentInput& input) {
  const double p = adjustment_coefficient(
      input.cos_sim, input.total_clients, input.selected_clients,
      input.client_dataset_size, input.total_dataset_size);
  const int loss_score = score_loss(input.loss_history, input.round);
  const int acc_score =
      score_acc(input.acc_history, input.round, input.selected_clients);
  const double round_score = score_round(input.round, input.total_rounds);
  const ScoreBreakdown score = total_score(loss_score, acc_score, round_score);
  return adjust_budget(input.epsilon, p, score);
}

}  // namespace cosafed
