#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ranloop/observer.hpp"
#include "ranloop/rng.hpp"

using namespace ranloop;

namespace {

/// One synthetic TTI row: a single cell serving a single UE.
TtiStats make_row(int64_t tti, int64_t delivered_bits, double hol_delay_ms, bool serviced,
                  int prbs_allocated = 50, int prbs_available = 100) {
  TtiStats row;
  row.tti = tti;
  UeTtiStats u;
  u.ue_id = 0;
  u.serving_cell = 0;
  u.delivered_bits = delivered_bits;
  u.serviced = serviced;
  u.hol_delay_ms = hol_delay_ms;
  u.buffer_bits = 8000;
  u.harq_tx = serviced ? 2 : 0;
  u.harq_nack = serviced ? 1 : 0;
  row.ues.push_back(u);
  CellTtiStats c;
  c.cell_id = 0;
  c.active = true;
  c.subband_mask = 0xF;
  c.tx_power_dbm = 43.0;
  c.carrier_prbs = 100;
  c.prbs_available = prbs_available;
  c.prbs_allocated = prbs_allocated;
  c.energy_j = 0.075;
  c.attached_ues = 1;
  c.has_channel_stats = true;
  c.rsrp_mean_dbm = -95.0;
  c.rsrp_min_dbm = -97.0;
  c.sinr_mean_db = 12.0;
  c.delivered_bits = delivered_bits;
  row.cells.push_back(c);
  return row;
}

}  // namespace

TEST_CASE("aggregate: a window of identical TTIs reproduces the per-TTI values") {
  std::vector<TtiStats> stats;
  for (int t = 1; t <= 10; ++t) stats.push_back(make_row(t, 18000, 3.0, true));
  const TelemetryReport report = aggregate(stats);
  CHECK(report.start_tti == 1);
  CHECK(report.end_tti == 10);
  REQUIRE(report.cells.size() == 1);
  const CellTelemetry& cell = report.cells[0];
  CHECK(*cell.rsrp_mean_dbm == doctest::Approx(-95.0));
  CHECK(*cell.rsrp_min_dbm == doctest::Approx(-97.0));
  CHECK(*cell.sinr_mean_db == doctest::Approx(12.0));
  CHECK(cell.prb_utilization == doctest::Approx(0.5));
  CHECK(cell.harq_nack_ratio == doctest::Approx(0.5));
  CHECK(cell.mean_buffer_bytes == doctest::Approx(1000.0));
  CHECK(cell.throughput_bps == doctest::Approx(18000.0 / kTtiSeconds));
  CHECK(cell.energy_j == doctest::Approx(0.75));
  CHECK(report.total_power_w == doctest::Approx(75.0));
  CHECK(report.p95_delay_ms == doctest::Approx(3.0));
  CHECK(report.jain_fairness == doctest::Approx(1.0));
}

TEST_CASE("aggregate: nearest-rank p95 over delays 1..100 is 95") {
  std::vector<TtiStats> stats;
  for (int t = 1; t <= 100; ++t) stats.push_back(make_row(t, 1000, static_cast<double>(t), true));
  CHECK(aggregate(stats).p95_delay_ms == doctest::Approx(95.0));
}

TEST_CASE("aggregate: cell with no attached UEs has absent channel fields") {
  TtiStats row = make_row(1, 0, 0.0, false);
  row.ues[0].serving_cell = -1;
  row.unattached_ues = 1;
  row.cells[0].attached_ues = 0;
  row.cells[0].has_channel_stats = false;
  row.cells[0].prbs_allocated = 0;
  const std::vector<TtiStats> stats = {row};
  const TelemetryReport report = aggregate(stats);
  CHECK(!report.cells[0].rsrp_mean_dbm.has_value());
  CHECK(!report.cells[0].rsrp_min_dbm.has_value());
  CHECK(report.cells[0].prb_utilization == 0.0);
  CHECK(report.max_unattached_ues == 1);
}

TEST_CASE("aggregate: empty window is an error") {
  const std::vector<TtiStats> stats;
  CHECK_THROWS_WITH_AS(aggregate(stats), doctest::Contains("empty window"), std::runtime_error);
}

TEST_CASE("jain index examples") {
  const std::vector<double> equal = {5, 5, 5, 5};
  CHECK(jain_index(equal) == doctest::Approx(1.0));
  const std::vector<double> single = {1, 0, 0, 0};
  CHECK(jain_index(single) == doctest::Approx(0.25));
  const std::vector<double> pair = {2, 1};
  CHECK(jain_index(pair) == doctest::Approx(0.9));  // 9 / (2 * 5)
  const std::vector<double> zeros = {0, 0};
  CHECK_THROWS_WITH_AS(jain_index(zeros), doctest::Contains("undefined fairness"),
                       std::runtime_error);
  const std::vector<double> negative = {1, -1};
  CHECK_THROWS_AS(jain_index(negative), std::invalid_argument);
}

TEST_CASE("jain index stays within [1/n, 1] under fuzz") {
  DeterministicRng rng(88);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + rng.uniform_int(RngStream::Agent, 20);
    std::vector<double> xs(n);
    bool any = false;
    for (double& x : xs) {
      x = rng.uniform(RngStream::Agent) < 0.2 ? 0.0 : rng.uniform(RngStream::Agent) * 1e8;
      any = any || x > 0.0;
    }
    if (!any) xs[0] = 1.0;
    const double j = jain_index(xs);
    CHECK(j >= 1.0 / n - 1e-12);
    CHECK(j <= 1.0 + 1e-12);
  }
}

namespace {

TelemetryReport reward_fixture(double se, double jain, double p95, double power) {
  TelemetryReport r;
  r.aggregate_se_bps_hz = se;
  r.jain_fairness = jain;
  r.p95_delay_ms = p95;
  r.total_power_w = power;
  return r;
}

}  // namespace

TEST_CASE("reward: weights and clamps") {
  ObjectiveWeights w;
  w.w_se = 1.0;
  w.w_fair = 1.0;
  w.w_lat = 1.0;
  w.w_energy = 1.0;
  w.se_ref_bps_hz = 2.0;
  w.lat_ref_ms = 20.0;
  w.p_ref_w = 400.0;

  SUBCASE("all weights zero yields zero") {
    ObjectiveWeights zero = w;
    zero.w_se = zero.w_fair = zero.w_lat = zero.w_energy = 0.0;
    const RewardSignal r = compute_reward(reward_fixture(4.0, 0.7, 100.0, 900.0), zero);
    CHECK(r.total == 0.0);
  }

  SUBCASE("normalizer identity") {
    ObjectiveWeights se_only = w;
    se_only.w_fair = se_only.w_lat = se_only.w_energy = 0.0;
    const RewardSignal r = compute_reward(reward_fixture(2.0, 0.5, 0.0, 0.0), se_only);
    CHECK(r.total == doctest::Approx(1.0));
  }

  SUBCASE("hand-computed composite") {
    // SE = ref, jain 0.9, p95 = 0.5 ref, power = 0.25 ref:
    // 1 + 0.9 - 0.5 - 0.25 = 1.15
    const RewardSignal r = compute_reward(reward_fixture(2.0, 0.9, 10.0, 100.0), w);
    CHECK(r.total == doctest::Approx(1.15));
    CHECK(r.se_term == doctest::Approx(1.0));
    CHECK(r.fairness_term == doctest::Approx(0.9));
    CHECK(r.latency_penalty == doctest::Approx(0.5));
    CHECK(r.energy_penalty == doctest::Approx(0.25));
  }

  SUBCASE("terms clamp at twice the normalizer") {
    const RewardSignal r = compute_reward(reward_fixture(100.0, 1.0, 1e6, 1e6), w);
    CHECK(r.se_term == doctest::Approx(2.0));
    CHECK(r.latency_penalty == doctest::Approx(2.0));
    CHECK(r.energy_penalty == doctest::Approx(2.0));
  }
}

TEST_CASE("reward: monotonicity and decomposition identity") {
  ObjectiveWeights w;
  DeterministicRng rng(5150);
  for (int trial = 0; trial < 2000; ++trial) {
    const double se = rng.uniform(RngStream::Agent) * 6.0;
    const double jain = rng.uniform(RngStream::Agent);
    const double p95 = rng.uniform(RngStream::Agent) * 100.0;
    const double power = rng.uniform(RngStream::Agent) * 1500.0;
    const RewardSignal r = compute_reward(reward_fixture(se, jain, p95, power), w);
    CHECK(r.total ==
          doctest::Approx(r.se_term + r.fairness_term - r.latency_penalty - r.energy_penalty)
              .epsilon(1e-12));
    // More SE never hurts; more delay never helps.
    const RewardSignal more_se = compute_reward(reward_fixture(se + 0.5, jain, p95, power), w);
    CHECK(more_se.total >= r.total - 1e-12);
    const RewardSignal more_delay =
        compute_reward(reward_fixture(se, jain, p95 + 10.0, power), w);
    CHECK(more_delay.total <= r.total + 1e-12);
  }
}

TEST_CASE("anomaly tracker: constant series never flags on an identical sample") {
  AnomalyTracker tracker("sinr");
  for (int i = 0; i < 100; ++i) {
    const AnomalyReport r = tracker.observe(10.0);
    CHECK(!r.flagged);
  }
}

TEST_CASE("anomaly tracker: never flags during warm-up") {
  AnomalyTracker tracker("rsrp");
  for (int i = 0; i < 20; ++i) {
    // Wild swings during warm-up stay unflagged.
    const AnomalyReport r = tracker.observe(i % 2 == 0 ? 0.0 : 1000.0);
    CHECK(!r.flagged);
  }
}

TEST_CASE("anomaly tracker: zero-variance step flags with infinite z") {
  AnomalyTracker tracker("throughput");
  for (int i = 0; i < 100; ++i) tracker.observe(10.0);
  const AnomalyReport r = tracker.observe(10.0 + 1e-8);  // 10 sigma-floors
  CHECK(r.flagged);
  CHECK(std::isinf(r.z));
}

TEST_CASE("anomaly tracker: a 5-sigma step flags within one sample post-warm-up") {
  AnomalyTracker tracker("load");
  DeterministicRng rng(314);
  const double sigma = 1.0;
  double last_mean = 0.0;
  for (int i = 0; i < 200; ++i) {
    tracker.observe(50.0 + sigma * rng.normal(RngStream::Agent));
    last_mean = tracker.mean();
  }
  const AnomalyReport r = tracker.observe(last_mean + 5.0 * sigma);
  CHECK(r.flagged);
}

TEST_CASE("forecast: constant series predicts the constant") {
  std::vector<double> history(30, 7.5);
  CHECK(forecast_load(history, 5) == doctest::Approx(7.5).epsilon(1e-6));
}

TEST_CASE("forecast: converges on an exact linear trend") {
  // Oracle: closed form a + b (t + h) for the series a + b t.
  const double a = 100.0, b = 2.0;
  std::vector<double> history;
  const int n = 50;
  for (int t = 0; t < n; ++t) history.push_back(a + b * t);
  const int64_t horizon = 4;
  const double expected = a + b * (n - 1 + horizon);
  CHECK(forecast_load(history, horizon) == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("forecast: negative extrapolation clamps to zero") {
  std::vector<double> history;
  for (int t = 0; t < 20; ++t) history.push_back(100.0 - 10.0 * t);
  CHECK(forecast_load(history, 50) == 0.0);
}

TEST_CASE("forecast: fewer than two samples is an error") {
  const std::vector<double> one = {5.0};
  CHECK_THROWS_WITH_AS(forecast_load(one, 1), doctest::Contains("insufficient history"),
                       std::runtime_error);
}

namespace {

CellTelemetry discretize_fixture(double utilization, double sinr, uint32_t mask) {
  CellTelemetry c;
  c.prb_utilization = utilization;
  c.sinr_mean_db = sinr;
  c.subband_mask = mask;
  return c;
}

}  // namespace

TEST_CASE("discretize: threshold lookups") {
  CHECK(discretize_cell(discretize_fixture(0.0, 30.0, 1)) ==
        CellDiscreteState{0, 0, 0});
  CHECK(discretize_cell(discretize_fixture(0.6, 5.0, 0xF)) ==
        CellDiscreteState{2, 2, 14});
  CHECK(discretize_cell(discretize_fixture(1.0, -5.0, 3)) ==
        CellDiscreteState{3, 3, 2});
}

TEST_CASE("discretize is pure: same report, same state") {
  TelemetryReport report;
  report.cells.push_back(discretize_fixture(0.4, 9.0, 5));
  report.cells.push_back(discretize_fixture(0.9, 1.0, 8));
  CHECK(discretize_state(report) == discretize_state(report));
}

TEST_CASE("state keys are unique across the enumerable space") {
  const int n_subbands = 4;
  std::vector<bool> seen(discrete_state_count(n_subbands), false);
  for (int load = 0; load < 4; ++load) {
    for (int intf = 0; intf < 4; ++intf) {
      for (int mask = 0; mask < 15; ++mask) {
        const uint64_t key = state_key({load, intf, mask}, n_subbands);
        REQUIRE(key < seen.size());
        CHECK(!seen[key]);
        seen[key] = true;
      }
    }
  }
}
