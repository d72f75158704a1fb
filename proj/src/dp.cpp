#include "cosafed/dp.hpp"

#include <cmath>

namespace cosafed {

double laplace_sample(double scale, RngStream& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCategory::param, "laplace_sample: scale must be positive");
  }
  // u in (-1/2, 1/2); reject the raw 0 draw so 1 - 2|u| never hits 0
  double v;
  do {
    v = uniform_unit(rng);
  } while (v == 0.0);
  const double u = v - 0.5;
  if (u == 0.0) return 0.0;
  const double sign = u > 0.0 ? 1.0 : -1.0;
  return scale * sign * std::log(1.0 - 2.0 * std::abs(u));
}

ParamVector noise_vector(std::size_t dim, double scale, RngStream& rng) {
  if (dim < 1) {
    throw Error(ErrorCategory::param, "noise_vector: dim must be >= 1");
  }
  ParamVector noise(dim);
  for (double& x : noise) x = laplace_sample(scale, rng);
  return noise;
}

ParamVector clip_update(const ParamVector& update, double clip_norm) {
  if (!(clip_norm > 0.0)) {
    throw Error(ErrorCategory::param, "clip_update: clip_norm must be positive");
  }
  double norm = 0.0;
  for (double x : update) norm += std::abs(x);
  if (norm <= clip_norm) return update;
  const double factor = clip_norm / norm;
  ParamVector clipped(update.size());
  for (std::size_t i = 0; i < update.size(); ++i) {
    clipped[i] = update[i] * factor;
  }
  return clipped;
}

void PrivacyLedger::record(int round, int client_id, double epsilon_spent) {
  if (epsilon_spent < 0.0 || !std::isfinite(epsilon_spent)) {
    throw Error(ErrorCategory::ledger,
                "ledger: epsilon_spent must be finite and >= 0");
  }
  if (!seen_.emplace(round, client_id).second) {
    throw Error(ErrorCategory::ledger,
                "ledger: duplicate entry for round " + std::to_string(round) +
                    ", client " + std::to_string(client_id));
  }
  entries_.push_back(LedgerEntry{round, client_id, epsilon_spent});
}

double PrivacyLedger::total() const noexcept {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.epsilon_spent;
  return sum;
}

}  // namespace cosafed
