#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "cosafed/rng.hpp"
#include "cosafed/types.hpp"

namespace cosafed {

struct BudgetParams {
  double epsilon = 0.0;      // initial per-client per-round budget, > 0
  double sensitivity = 0.0;  // L1 sensitivity, > 0
};

/// One draw from Laplace(0, scale) via inverse CDF:
/// scale * sign(u) * ln(1 - 2|u|), u uniform on (-1/2, 1/2).
double laplace_sample(double scale, RngStream& rng);

/// dim independent Laplace draws at the given scale.
ParamVector noise_vector(std::size_t dim, double scale, RngStream& rng);

/// update * min(1, clip_norm / |update|_1); never increases a coordinate's
/// magnitude, preserves direction. L1 because the privacy argument bounds
/// the L1 distance between adjacent outputs.
ParamVector clip_update(const ParamVector& update, double clip_norm);

struct LedgerEntry {
  int round = 0;
  int client_id = 0;
  double epsilon_spent = 0.0;
};

/// Append-only record of every budget spent; the sum over all entries is
/// the run's total privacy budget. Single-writer: only the aggregation
/// barrier records entries.
class PrivacyLedger {
 public:
  void record(int round, int client_id, double epsilon_spent);
  double total() const noexcept;

  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<LedgerEntry> entries_;
  std::set<std::pair<int, int>> seen_;
};

}  // namespace cosafed
