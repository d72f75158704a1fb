#include <doctest.h>

#include <cmath>
#include <vector>

#include "cosafed/adjuster.hpp"
#include "cosafed/rng.hpp"

using namespace cosafed;

namespace {

// Straight-line re-evaluation of the whole adjustment, kept independent of
// the composed pipeline it checks. Factors multiply left to right exactly
// as in the composed operations.
AdjustedBudget adjust_oracle(const AdjustmentInput& in) {
  double p;
  if (in.cos_sim < 0.0) {
    p = 1.0;
  } else {
    p = std::abs(1.0 - in.cos_sim *
                           (double(in.total_clients) / in.selected_clients) *
                           (double(in.client_dataset_size) /
                            double(in.total_dataset_size)));
  }
  const int completed_loss =
      std::min<int>(in.round - 1, int(in.loss_history.size()));
  int sl = 0;
  if (completed_loss >= 2) {
    sl = in.loss_history[completed_loss - 1] >=
                 in.loss_history[completed_loss - 2]
             ? 1
             : 0;
  }
  const int completed_acc =
      std::min<int>(in.round - 1, int(in.acc_history.size()));
  int sa = 0;
  if (completed_acc >= 1) {
    const int w = std::min(in.selected_clients, completed_acc);
    double sum = 0.0;
    for (int k = completed_acc - w; k < completed_acc; ++k) {
      sum += in.acc_history[k];
    }
    sa = (sum / w) >= in.acc_history[completed_acc - 1] ? 1 : 0;
  }
  const double tr = double(in.round) / double(in.total_rounds);
  const double st = tr <= 0.5 ? 2.0 * tr : 1.0;
  const double total = 30.0 * sl + 40.0 * sa + 30.0 * st;

  AdjustedBudget out;
  out.coefficient = p;
  out.score = ScoreBreakdown{sl, sa, st, total};
  out.reduced = total > 50.0 && p <= 1.0;
  out.epsilon_prime = out.reduced ? p * in.epsilon : in.epsilon;
  return out;
}

AdjustmentInput random_input(RngStream& rng, std::vector<double>& acc,
                             std::vector<double>& loss) {
  AdjustmentInput in;
  in.cos_sim = uniform_unit(rng) * 2.0 - 1.0;
  in.total_clients = 1 + int(uniform_below(rng, 200));
  in.selected_clients = 1 + int(uniform_below(rng, in.total_clients));
  in.total_dataset_size = 1 + long(uniform_below(rng, 1000000));
  in.client_dataset_size = 1 + long(uniform_below(rng, in.total_dataset_size));
  // T >= 2: the 60/T score floor is the paper's envelope and only holds
  // once the ramp region is nonempty (T = 1 forces score_t = 1, total 30)
  in.total_rounds = 2 + int(uniform_below(rng, 999));
  in.round = 1 + int(uniform_below(rng, in.total_rounds));
  const int n_hist = std::min(in.round - 1, 50);
  acc.resize(n_hist);
  loss.resize(n_hist);
  for (auto& v : acc) v = uniform_unit(rng);
  for (auto& v : loss) v = 3.0 * uniform_unit(rng);
  in.acc_history = acc;
  in.loss_history = loss;
  in.epsilon = 1e-3 + 1000.0 * uniform_unit(rng);
  return in;
}

}  // namespace

TEST_CASE("adjustment_coefficient: sign branch and arithmetic") {
  CHECK(adjustment_coefficient(-0.3, 100, 3, 600, 60000) == 1.0);
  CHECK(adjustment_coefficient(-1.0, 5, 2, 10, 100) == 1.0);
  CHECK(adjustment_coefficient(0.0, 100, 3, 600, 60000) == 1.0);
  CHECK(adjustment_coefficient(1.0, 100, 3, 600, 60000) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("adjustment_coefficient: parameter errors") {
  CHECK_THROWS_AS(adjustment_coefficient(0.5, 100, 0, 600, 60000), Error);
  CHECK_THROWS_AS(adjustment_coefficient(0.5, 100, 3, 600, 0), Error);
  CHECK_THROWS_AS(adjustment_coefficient(0.5, 2, 3, 600, 60000), Error);
  CHECK_THROWS_AS(adjustment_coefficient(0.5, 100, 3, 600, 500), Error);
}

TEST_CASE("score_loss: trend and early rounds") {
  const std::vector<double> rising = {1.2, 0.9, 0.95};
  const std::vector<double> falling = {1.2, 0.95, 0.9};
  CHECK(score_loss(rising, 4) == 1);
  CHECK(score_loss(falling, 4) == 0);
  const std::vector<double> one = {0.9};
  CHECK(score_loss(one, 2) == 0);
  CHECK(score_loss({}, 1) == 0);
  const std::vector<double> equal = {0.9, 0.9};
  CHECK(score_loss(equal, 3) == 1);  // >= keeps the boundary
}

TEST_CASE("score_acc: N-round window ending at t-1") {
  // t=10, N=3: mean(acc_7, acc_8, acc_9) vs acc_9
  std::vector<double> acc(9, 0.5);
  acc[6] = 0.80;
  acc[7] = 0.82;
  acc[8] = 0.81;
  CHECK(score_acc(acc, 10, 3) == 1);  // 0.81 >= 0.81
  acc[6] = 0.70;
  acc[7] = 0.75;
  acc[8] = 0.85;
  CHECK(score_acc(acc, 10, 3) == 0);  // 0.766... < 0.85
  const std::vector<double> constant(7, 0.6);
  CHECK(score_acc(constant, 8, 3) == 1);
  CHECK(score_acc({}, 1, 3) == 0);
  // short history: mean over the entries that exist
  const std::vector<double> two = {0.4, 0.6};
  CHECK(score_acc(two, 3, 5) == 0);  // mean 0.5 < 0.6
}

TEST_CASE("score_round: piecewise ramp") {
  CHECK(score_round(350, 350) == 1.0);
  CHECK(score_round(175, 350) == 1.0);  // t/T = 1/2 still on the ramp: 2*(1/2)
  CHECK(score_round(25, 100) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(score_round(1, 350) == doctest::Approx(2.0 / 350.0).epsilon(1e-15));
  CHECK_THROWS_AS(score_round(0, 10), Error);
  CHECK_THROWS_AS(score_round(11, 10), Error);
}

TEST_CASE("total_score: weighted sum and envelopes") {
  CHECK(total_score(1, 1, 1.0).total == 100.0);
  const double t350 = total_score(0, 0, 2.0 / 350.0).total;
  CHECK(t350 == doctest::Approx(60.0 / 350.0).epsilon(1e-15));
  CHECK(total_score(1, 0, 0.5).total == 45.0);
}

TEST_CASE("adjust_budget: judgment boundaries") {
  ScoreBreakdown s60 = total_score(1, 0, 1.0);  // 30 + 30 = 60
  const auto reduced = adjust_budget(100.0, 0.8, s60);
  CHECK(reduced.reduced);
  CHECK(reduced.epsilon_prime == doctest::Approx(80.0).epsilon(1e-15));

  ScoreBreakdown s50 = total_score(1, 0, 2.0 / 3.0);  // 30 + 20 = 50
  CHECK(s50.total == doctest::Approx(50.0).epsilon(1e-12));
  s50.total = 50.0;  // pin the boundary exactly
  const auto kept = adjust_budget(100.0, 0.8, s50);
  CHECK_FALSE(kept.reduced);
  CHECK(kept.epsilon_prime == 100.0);

  ScoreBreakdown s90 = total_score(1, 1, 2.0 / 3.0);
  const auto big_p = adjust_budget(100.0, 1.2, s90);
  CHECK_FALSE(big_p.reduced);
  CHECK(big_p.epsilon_prime == 100.0);

  // p = 1 exactly is inclusive
  const auto p_one = adjust_budget(100.0, 1.0, s60);
  CHECK(p_one.reduced);
  CHECK(p_one.epsilon_prime == 100.0);
}

TEST_CASE("adjust: composed examples") {
  std::vector<double> loss = {1.2, 0.9, 0.95};  // rising tail -> 1
  std::vector<double> acc = {0.5, 0.5, 0.5};    // constant -> 1

  AdjustmentInput in;
  in.total_clients = 2;
  in.selected_clients = 2;
  in.client_dataset_size = 1;
  in.total_dataset_size = 1;
  in.round = 4;
  in.total_rounds = 4;
  in.acc_history = acc;
  in.loss_history = loss;
  in.epsilon = 100.0;

  in.cos_sim = 0.5;  // p = |1 - 0.5| = 0.5, score = 100
  auto out = adjust(in);
  CHECK(out.score.total == 100.0);
  CHECK(out.coefficient == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.epsilon_prime == doctest::Approx(50.0).epsilon(1e-12));

  in.cos_sim = -0.7;  // p = 1 fixed point: reduction is a no-op
  out = adjust(in);
  CHECK(out.coefficient == 1.0);
  CHECK(out.epsilon_prime == 100.0);

  // round 1, empty histories: 60/T <= 50 so the budget stays
  AdjustmentInput first;
  first.cos_sim = 0.9;
  first.total_clients = 100;
  first.selected_clients = 3;
  first.client_dataset_size = 600;
  first.total_dataset_size = 60000;
  first.round = 1;
  first.total_rounds = 350;
  first.epsilon = 100.0;
  out = adjust(first);
  CHECK(out.score.total == doctest::Approx(60.0 / 350.0).epsilon(1e-12));
  CHECK_FALSE(out.reduced);
  CHECK(out.epsilon_prime == 100.0);
}

TEST_CASE("adjust: bounds, oracle equality and monotonicity over 10^4 cases") {
  auto rng = make_stream(20240811, 0xAD);
  std::vector<double> acc, loss;
  for (int trial = 0; trial < 10000; ++trial) {
    const AdjustmentInput in = random_input(rng, acc, loss);
    const auto out = adjust(in);

    // coefficient bound, p = 1 on the negative branch
    const double p_max = std::max(1.0, double(in.total_clients - 1));
    CHECK(out.coefficient >= 0.0);
    CHECK(out.coefficient <= p_max);
    if (in.cos_sim < 0.0) CHECK(out.coefficient == 1.0);

    // score bound
    CHECK(out.score.total >= 60.0 / in.total_rounds - 1e-12);
    CHECK(out.score.total <= 100.0);

    // budget bound and judgment
    CHECK(out.epsilon_prime >= 0.0);
    CHECK(out.epsilon_prime <= in.epsilon);
    if (out.score.total <= 50.0 || out.coefficient > 1.0) {
      CHECK(out.epsilon_prime == in.epsilon);
    }

    // exact agreement with the straight-line oracle
    const auto expect = adjust_oracle(in);
    CHECK(out.coefficient == expect.coefficient);
    CHECK(out.score.score_loss == expect.score.score_loss);
    CHECK(out.score.score_acc == expect.score.score_acc);
    CHECK(out.score.score_t == expect.score.score_t);
    CHECK(out.score.total == expect.score.total);
    CHECK(out.reduced == expect.reduced);
    CHECK(out.epsilon_prime == expect.epsilon_prime);

    // total is nondecreasing in each subscore
    const auto& s = out.score;
    CHECK(total_score(1, s.score_acc, s.score_t).total >= s.total);
    CHECK(total_score(s.score_loss, 1, s.score_t).total >= s.total);
    CHECK(total_score(s.score_loss, s.score_acc, 1.0).total >= s.total);
  }
}

TEST_CASE("adjustment_coefficient: monotone while the product stays <= 1") {
  auto rng = make_stream(777, 0xAE);
  int checked = 0;
  while (checked < 2000) {
    const int m = 1 + int(uniform_below(rng, 50));
    const int n = 1 + int(uniform_below(rng, m));
    const long long d = 1 + (long long)uniform_below(rng, 100000);
    const long long di = 1 + (long long)uniform_below(rng, d);
    const double cos_lo = uniform_unit(rng);
    const double cos_hi = cos_lo + (1.0 - cos_lo) * uniform_unit(rng);
    const double factor = (double(m) / n) * (double(di) / double(d));
    if (cos_hi * factor > 1.0) continue;
    ++checked;

    // nonincreasing in cos_sim
    CHECK(adjustment_coefficient(cos_hi, m, n, di, d) <=
          adjustment_coefficient(cos_lo, m, n, di, d) + 1e-12);
    // nonincreasing in D_i (keep product <= 1 by shrinking)
    if (di > 1) {
      CHECK(adjustment_coefficient(cos_hi, m, n, di - 1, d) >=
            adjustment_coefficient(cos_hi, m, n, di, d) - 1e-12);
    }
    // nondecreasing in N
    if (n < m) {
      CHECK(adjustment_coefficient(cos_hi, m, n + 1, di, d) >=
            adjustment_coefficient(cos_hi, m, n, di, d) - 1e-12);
    }
  }
}

TEST_CASE("score_round: T = 1 saturates immediately") {
  // t/T = 1 > 1/2, so the only valid round scores 1 and the total floor
  // is 30, not 60/T
  CHECK(score_round(1, 1) == 1.0);
  CHECK(total_score(0, 0, score_round(1, 1)).total == 30.0);
}

TEST_CASE("score_round: nondecreasing in t, saturates at T/2") {
  const int T = 101;
  double prev = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double s = score_round(t, T);
    CHECK(s >= prev);
    if (2 * t >= T) CHECK(s == 1.0);
    prev = s;
  }
}
