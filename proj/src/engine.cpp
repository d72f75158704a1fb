#include "cosafed/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <numeric>
#include <thread>

namespace cosafed {

std::vector<int> select_clients(int total_clients, int selected_clients,
                                int round, std::uint64_t master_seed) {
  if (selected_clients < 1 || selected_clients > total_clients) {
    throw Error(ErrorCategory::config,
                "select_clients: require 1 <= N <= M (" +
                    std::to_string(selected_clients) + " vs " +
                    std::to_string(total_clients) + ")");
  }
  std::vector<int> pool(total_clients);
  std::iota(pool.begin(), pool.end(), 0);
  auto rng = make_stream(master_seed, kSeedSelect,
                         static_cast<std::uint64_t>(round));
  for (int i = 0; i < selected_clients; ++i) {
    const auto j = i + static_cast<int>(uniform_below(
                           rng, static_cast<std::uint64_t>(total_clients - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> selected(pool.begin(), pool.begin() + selected_clients);
  std::sort(selected.begin(), selected.end());
  return selected;
}

ParamVector compute_update(const ParamVector& global_prev,
                           const ParamVector& local) {
  if (global_prev.size() != local.size()) {
    throw Error(ErrorCategory::param, "compute_update: shape mismatch");
  }
  ParamVector update(global_prev.size());
  for (std::size_t i = 0; i < update.size(); ++i) {
    update[i] = global_prev[i] - local[i];
  }
  return update;
}

double apply_epsilon_floor(double epsilon_prime, double floor) {
  return std::max(epsilon_prime, floor);
}

ClientUpload make_upload(const ParamVector& global_prev,
                         const ParamVector& local,
                         const AdjustedBudget& budget,
                         const BudgetParams& dp, int client_id, double weight,
                         RngStream& rng, const UploadOptions& opts) {
  if (!(budget.epsilon_prime > 0.0)) {
    throw Error(ErrorCategory::param,
                "make_upload: degenerate budget (epsilon' <= 0 means an "
                "infinite noise scale)");
  }
  ClientUpload upload;
  upload.client_id = client_id;
  upload.weight = weight;
  upload.epsilon_spent = budget.epsilon_prime;
  upload.coefficient = budget.coefficient;
  upload.score_total = budget.score.total;
  upload.cos_sim = opts.force_unit_scaling
                       ? 1.0
                       : cosine_similarity(global_prev, local);

  ParamVector update = compute_update(global_prev, local);
  if (opts.clip) update = clip_update(update, dp.sensitivity);
  for (double& x : update) x *= upload.cos_sim;
  if (opts.noise) {
    upload.noise_scale = dp.sensitivity / budget.epsilon_prime;
    const ParamVector noise = noise_vector(update.size(), upload.noise_scale, rng);
    for (std::size_t i = 0; i < update.size(); ++i) update[i] += noise[i];
  }
  upload.noised_update = std::move(update);
  return upload;
}

ParamVector aggregate(const ParamVector& global_prev,
                      const std::vector<ClientUpload>& uploads) {
  if (uploads.empty()) {
    throw Error(ErrorCategory::train, "aggregate: no uploads (round failure)");
  }
  std::vector<std::size_t> order(uploads.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return uploads[a].client_id < uploads[b].client_id;
  });
  double total_weight = 0.0;
  for (std::size_t i : order) {
    if (uploads[i].noised_update.size() != global_prev.size()) {
      throw Error(ErrorCategory::param, "aggregate: shape mismatch");
    }
    total_weight += uploads[i].weight;
  }
  ParamVector next = global_prev;
  for (std::size_t i : order) {
    const double w = uploads[i].weight / total_weight;
    const ParamVector& q = uploads[i].noised_update;
    for (std::size_t k = 0; k < next.size(); ++k) next[k] -= w * q[k];
  }
  return next;
}

namespace {

// Budget for one client under the configured strategy. CosAFed runs the
// full adjustment; the comparators mirror the simplified descriptions of
// the methods they stand in for.
AdjustedBudget strategy_budget(const ExperimentConfig& cfg,
                               const GlobalState& state, double cos_local,
                               long long client_size, long long total_size) {
  switch (cfg.method) {
    case Method::CosAFed: {
      AdjustmentInput input;
      input.cos_sim = cos_local;
      input.total_clients = cfg.total_clients;
      input.selected_clients = cfg.clients_per_round;
      input.client_dataset_size = client_size;
      input.total_dataset_size = total_size;
      input.round = state.round;
      input.total_rounds = cfg.rounds;
      input.acc_history = state.acc_history;
      input.loss_history = state.loss_history;
      input.epsilon = cfg.epsilon;
      return adjust(input);
    }
    case Method::FixedBudget: {
      AdjustedBudget budget;
      budget.epsilon_prime = cfg.epsilon;
      budget.coefficient = 1.0;
      budget.reduced = false;
      return budget;
    }
    case Method::ScoreFixedP: {
      const ScoreBreakdown score = total_score(
          score_loss(state.loss_history, state.round),
          score_acc(state.acc_history, state.round, cfg.clients_per_round),
          score_round(state.round, cfg.rounds));
      AdjustedBudget budget;
      budget.score = score;
      budget.reduced = score.total > 50.0;
      budget.coefficient = budget.reduced ? cfg.score_fixed_p : 1.0;
      budget.epsilon_prime = budget.coefficient * cfg.epsilon;
      return budget;
    }
    case Method::CosineOnly: {
      // Similarity of adjacent global models; starts high (2x) while the
      // model still moves, decays toward the initial budget near
      // convergence, never drops below it.
      const double cos_global =
          cosine_similarity(state.model, state.prev_model);
      AdjustedBudget budget;
      budget.coefficient = 2.0 - cos_global;
      budget.epsilon_prime = budget.coefficient * cfg.epsilon;
      budget.reduced = false;
      return budget;
    }
  }
  throw Error(ErrorCategory::config, "unknown method");
}

struct ClientResult {
  bool diverged = false;
  ClientUpload upload;
};

}  // namespace

RoundRecord run_round(GlobalState& state, const ExperimentConfig& cfg,
                      const Dataset& train, const Partition& partition,
                      const Dataset& test) {
  const int round = state.round;
  const auto selected = select_clients(cfg.total_clients, cfg.clients_per_round,
                                       round, cfg.seed);
  const SgdOptions sgd_opt{cfg.lr, cfg.local_epochs, cfg.batch_size};
  const UploadOptions upload_opt{cfg.noise, cfg.force_unit_scaling, cfg.clip};
  const BudgetParams dp{cfg.epsilon, cfg.sensitivity};
  const double floor = materialized_epsilon_floor(cfg);
  const auto total_size = static_cast<long long>(train.size());

  std::vector<ClientResult> results(selected.size());
  std::vector<std::exception_ptr> failures(selected.size());

  const auto process_client = [&](std::size_t slot) {
    const int client = selected[slot];
    const auto& indices = partition.assignments.at(client);
    try {
      const std::uint64_t sgd_seed =
          derive_seed(cfg.seed, kSeedSgd, static_cast<std::uint64_t>(round),
                      static_cast<std::uint64_t>(client));
      const ParamVector local =
          local_sgd(state.model, train, indices, sgd_opt, sgd_seed);
      const double cos_local = cosine_similarity(state.model, local);
      AdjustedBudget budget = strategy_budget(
          cfg, state, cos_local, static_cast<long long>(indices.size()),
          total_size);
      if (budget.epsilon_prime < floor) {
        std::clog << "round " << round << " client " << client
                  << ": epsilon' " << budget.epsilon_prime
                  << " clamped to floor " << floor << '\n';
        budget.epsilon_prime = apply_epsilon_floor(budget.epsilon_prime, floor);
      }
      auto noise_rng = make_stream(cfg.seed, kSeedNoise,
                                   static_cast<std::uint64_t>(round),
                                   static_cast<std::uint64_t>(client));
      results[slot].upload =
          make_upload(state.model, local, budget, dp, client,
                      static_cast<double>(indices.size()), noise_rng,
                      upload_opt);
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::train) {
        results[slot].diverged = true;
        std::clog << "round " << round << " client " << client
                  << " dropped: " << e.what() << '\n';
      } else {
        failures[slot] = std::current_exception();
      }
    } catch (...) {
      failures[slot] = std::current_exception();
    }
  };

  if (cfg.workers <= 1 || selected.size() <= 1) {
    for (std::size_t i = 0; i < selected.size(); ++i) process_client(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const int n_workers = std::min<int>(cfg.workers,
                                        static_cast<int>(selected.size()));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < selected.size();
             i = next.fetch_add(1)) {
          process_client(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  // aggregation barrier: the only ledger writer, in client-id order
  std::vector<ClientUpload> uploads;
  uploads.reserve(results.size());
  RoundRecord record;
  record.round = round;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].diverged) continue;
    const ClientUpload& u = results[i].upload;
    state.ledger.record(round, u.client_id, u.epsilon_spent);
    record.selected.push_back(u.client_id);
    record.epsilons.push_back(u.epsilon_spent);
    record.coefficients.push_back(u.coefficient);
    record.noise_scales.push_back(u.noise_scale);
    record.round_budget += u.epsilon_spent;
    record.mean_coefficient += u.coefficient;
    record.mean_score += u.score_total;
    uploads.push_back(std::move(results[i].upload));
  }
  if (uploads.empty()) {
    throw Error(ErrorCategory::train,
                "round " + std::to_string(round) +
                    ": all clients diverged (round failure)");
  }
  record.mean_coefficient /= static_cast<double>(uploads.size());
  record.mean_score /= static_cast<double>(uploads.size());

  ParamVector next_model = aggregate(state.model, uploads);
  const EvalResult eval = evaluate(next_model, test);
  record.accuracy = eval.accuracy;
  record.loss = eval.loss;
  record.cumulative_budget = state.ledger.total();

  state.prev_model = std::move(state.model);
  state.model = std::move(next_model);
  state.acc_history.push_back(eval.accuracy);
  state.loss_history.push_back(eval.loss);
  ++state.round;
  return record;
}

TrainingResult run_training(const ExperimentConfig& cfg, const Dataset& train,
                            const Dataset& test) {
  validate_config(cfg);
  if (train.size() == 0 || test.size() == 0) {
    throw Error(ErrorCategory::data, "run_training: empty dataset");
  }
  int n_classes = 2;
  for (std::uint8_t label : train.labels) {
    n_classes = std::max(n_classes, static_cast<int>(label) + 1);
  }
  const ModelShape shape{train.n_features(), n_classes};

  Partition partition =
      cfg.partition == PartitionMode::Equal
          ? partition_equal(train, cfg.total_clients, cfg.partition_seed)
          : partition_random(train, cfg.total_clients, cfg.partition_seed,
                             cfg.min_partition_size);

  GlobalState state;
  state.model = init_model(shape, cfg.seed, cfg.init);
  state.prev_model = state.model;

  TrainingResult result;
  result.records.reserve(static_cast<std::size_t>(cfg.rounds));
  while (state.round <= cfg.rounds) {
    result.records.push_back(run_round(state, cfg, train, partition, test));
  }
  result.final_model = std::move(state.model);
  result.ledger = std::move(state.ledger);
  return result;
}

}  // namespace cosafed
