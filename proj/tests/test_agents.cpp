#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ranloop/agents.hpp"

using namespace ranloop;

// ---------------------------------------------------------------------------
// Q-learning
// ---------------------------------------------------------------------------

TEST_CASE("q_select: tie-break, argmax, and exploration") {
  QTable table;
  DeterministicRng rng(1);

  SUBCASE("all-zero table with eps 0 picks action 0") {
    CHECK(q_select(table, 5, 15, 0.0, rng) == 0);
  }

  SUBCASE("argmax picks the lifted action") {
    table.set(5, 7, 1.0);
    CHECK(q_select(table, 5, 15, 0.0, rng) == 7);
  }

  SUBCASE("eps 1 explores uniformly (chi-squared)") {
    constexpr int kActions = 15;
    constexpr int kDraws = 10000;
    std::vector<int> counts(kActions, 0);
    for (int i = 0; i < kDraws; ++i) ++counts[q_select(table, 5, kActions, 1.0, rng)];
    const double expected = static_cast<double>(kDraws) / kActions;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 36.1);  // 14 dof, 99.9th percentile
  }
}

TEST_CASE("q_select argmax is invariant under positive scaling") {
  QTable table;
  DeterministicRng rng(2);
  table.set(3, 2, 0.4);
  table.set(3, 9, 1.3);
  table.set(3, 11, -0.7);
  const int base = q_select(table, 3, 15, 0.0, rng);
  QTable scaled;
  scaled.set(3, 2, 4.0);
  scaled.set(3, 9, 13.0);
  scaled.set(3, 11, -7.0);
  CHECK(q_select(scaled, 3, 15, 0.0, rng) == base);
}

TEST_CASE("q_update arithmetic") {
  SUBCASE("single-step backup from an all-zero table") {
    QTable table;
    q_update(table, 1, 4, 1.0, 2, 15, 0.5, 0.9);
    CHECK(table.get(1, 4) == doctest::Approx(0.5));
  }
  SUBCASE("alpha 1, gamma 0 overwrites with the reward") {
    QTable table;
    table.set(1, 4, 123.0);
    q_update(table, 1, 4, -2.5, 2, 15, 1.0, 0.0);
    CHECK(table.get(1, 4) == doctest::Approx(-2.5));
  }
  SUBCASE("zero reward on a zero table is a fixed point") {
    QTable table;
    q_update(table, 1, 4, 0.0, 2, 15, 0.1, 0.9);
    CHECK(table.get(1, 4) == 0.0);
  }
  SUBCASE("non-finite reward is an error") {
    QTable table;
    CHECK_THROWS_WITH_AS(
        q_update(table, 1, 4, std::numeric_limits<double>::quiet_NaN(), 2, 15, 0.1, 0.9),
        doctest::Contains("invalid reward"), std::invalid_argument);
  }
}

TEST_CASE("q_update touches exactly one entry") {
  QTable table;
  for (uint64_t s = 0; s < 10; ++s) {
    for (int a = 0; a < 15; ++a) table.set(s, a, 0.25 * static_cast<double>(s) + a);
  }
  QTable before = table;
  q_update(table, 4, 9, 2.0, 5, 15, 0.1, 0.9);
  int changed = 0;
  for (uint64_t s = 0; s < 10; ++s) {
    for (int a = 0; a < 15; ++a) {
      if (table.get(s, a) != before.get(s, a)) {
        ++changed;
        CHECK(s == 4);
        CHECK(a == 9);
      }
    }
  }
  CHECK(changed == 1);
}

TEST_CASE("q values stay bounded by r_max/(1-gamma) under clamped rewards") {
  QTable table;
  DeterministicRng rng(3);
  const double r_max = 3.0;
  const double gamma = 0.9;
  const double bound = r_max / (1.0 - gamma) + 1e-9;
  for (int step = 0; step < 100000; ++step) {
    const uint64_t s = rng.uniform_int(RngStream::Agent, 240);
    const uint64_t s_next = rng.uniform_int(RngStream::Agent, 240);
    const int a = rng.uniform_int(RngStream::Agent, 15);
    const double r = (2.0 * rng.uniform(RngStream::Agent) - 1.0) * r_max;
    q_update(table, s, a, r, s_next, 15, 0.1, gamma);
  }
  for (const auto& [key, value] : table.entries()) {
    CHECK(std::abs(value) <= bound);
    CHECK(std::isfinite(value));
  }
}

// ---------------------------------------------------------------------------
// Actor-critic
// ---------------------------------------------------------------------------

namespace {

std::vector<double> fixture_features() { return {1.0, 0.4, 0.6, 0.5, 0.9}; }

}  // namespace

TEST_CASE("ac_act: zero policy with vanishing sigma degenerates to zero") {
  ActorCriticParams params;
  params.sigma = 1e-12;
  DeterministicRng rng(4);
  CHECK(ac_act(params, fixture_features(), rng) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("ac_act: sample mean tracks theta . phi") {
  ActorCriticParams params;
  params.theta = {2.0, 0.0, 0.0, 0.0, 0.0};  // theta . phi = 2.0 with bias feature
  DeterministicRng rng(5);
  const auto phi = fixture_features();
  constexpr int kDraws = 100000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += ac_act(params, phi, rng);
  CHECK(sum / kDraws == doctest::Approx(2.0).epsilon(0.005));
}

TEST_CASE("ac_act: identical rng cursor yields the identical sample") {
  ActorCriticParams params;
  params.theta = {0.5, 0.1, 0.2, 0.3, 0.4};
  DeterministicRng a(6), b(6);
  CHECK(ac_act(params, fixture_features(), a) == ac_act(params, fixture_features(), b));
}

TEST_CASE("ac_act: dimension mismatch is an error") {
  ActorCriticParams params;
  DeterministicRng rng(7);
  const std::vector<double> wrong = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(ac_act(params, wrong, rng), doctest::Contains("dimension"),
                       std::invalid_argument);
}

TEST_CASE("ac_update arithmetic") {
  SUBCASE("critic step from zero weights") {
    ActorCriticParams params;
    const auto phi = fixture_features();
    ac_update(params, phi, 0.0, 1.0, phi);
    // delta = 1 + 0.9*0 - 0 = 1; w <- alpha_critic * phi.
    for (std::size_t i = 0; i < phi.size(); ++i) {
      CHECK(params.w[i] == doctest::Approx(0.01 * phi[i]));
    }
  }
  SUBCASE("action at the policy mean leaves theta unchanged") {
    ActorCriticParams params;
    params.theta = {1.0, 0.5, 0.0, 0.0, 0.0};
    const auto theta_before = params.theta;
    const auto phi = fixture_features();
    double mean = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) mean += params.theta[i] * phi[i];
    ac_update(params, phi, mean, 2.0, phi);
    CHECK(params.theta == theta_before);  // zero score function
  }
  SUBCASE("zero TD error is a fixed point") {
    ActorCriticParams params;
    params.w = {1.0, 0.0, 0.0, 0.0, 0.0};
    params.gamma = 1.0;
    const auto phi = fixture_features();
    const auto w_before = params.w;
    const auto theta_before = params.theta;
    ac_update(params, phi, 0.7, 0.0, phi);  // delta = 0 + 1*v - v = 0
    CHECK(params.w == w_before);
    CHECK(params.theta == theta_before);
  }
  SUBCASE("non-finite TD error reports divergence") {
    ActorCriticParams params;
    const auto phi = fixture_features();
    CHECK_THROWS_WITH_AS(
        ac_update(params, phi, 0.0, std::numeric_limits<double>::infinity(), phi),
        doctest::Contains("diverged"), std::runtime_error);
  }
}

TEST_CASE("ac parameters stay finite over a million random clamped updates") {
  ActorCriticParams params;
  DeterministicRng rng(8);
  std::vector<double> phi(kAcFeatureDim), phi_next(kAcFeatureDim);
  for (int step = 0; step < 1000000; ++step) {
    phi[0] = 1.0;
    phi_next[0] = 1.0;
    for (int i = 1; i < kAcFeatureDim; ++i) {
      phi[i] = rng.uniform(RngStream::Agent);
      phi_next[i] = rng.uniform(RngStream::Agent);
    }
    const double action = 6.0 * (rng.uniform(RngStream::Agent) - 0.5);
    const double reward = std::clamp(4.0 * (rng.uniform(RngStream::Agent) - 0.5), -2.0, 2.0);
    ac_update(params, phi, action, reward, phi_next);
  }
  for (double v : params.theta) CHECK(std::isfinite(v));
  for (double v : params.w) CHECK(std::isfinite(v));
}

TEST_CASE("policy log-gradient matches central finite differences") {
  // Oracle: d/dtheta_i log N(a; theta.phi, sigma^2) via central differences
  // of the closed-form log density.
  DeterministicRng rng(9);
  auto log_density = [](const ActorCriticParams& p, const std::vector<double>& phi, double a) {
    double mean = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) mean += p.theta[i] * phi[i];
    const double z = (a - mean) / p.sigma;
    return -0.5 * z * z - std::log(p.sigma) - 0.5 * std::log(2.0 * M_PI);
  };
  for (int draw = 0; draw < 100; ++draw) {
    ActorCriticParams params;
    std::vector<double> phi(kAcFeatureDim);
    for (int i = 0; i < kAcFeatureDim; ++i) {
      params.theta[i] = 2.0 * rng.uniform(RngStream::Agent) - 1.0;
      phi[i] = 2.0 * rng.uniform(RngStream::Agent) - 1.0;
    }
    const double action = 4.0 * (rng.uniform(RngStream::Agent) - 0.5);
    const auto grad = policy_log_gradient(params, phi, action);
    const double h = 1e-6;
    for (int i = 0; i < kAcFeatureDim; ++i) {
      ActorCriticParams up = params, down = params;
      up.theta[i] += h;
      down.theta[i] -= h;
      const double numeric = (log_density(up, phi, action) - log_density(down, phi, action)) /
                             (2.0 * h);
      const double scale = std::max(std::abs(numeric), 1.0);
      CHECK(std::abs(grad[i] - numeric) / scale < 1e-5);
    }
  }
}

TEST_CASE("policy log-gradient basics") {
  ActorCriticParams params;
  params.theta = {0.3, 0.1, 0.0, 0.0, 0.0};
  const std::vector<double> phi = {1.0, 0.5, 0.2, 0.1, 0.9};
  double mean = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) mean += params.theta[i] * phi[i];

  SUBCASE("zero at the mode") {
    const auto grad = policy_log_gradient(params, phi, mean);
    for (double g : grad) CHECK(g == doctest::Approx(0.0));
  }
  SUBCASE("linear in phi for a fixed residual") {
    const double action = mean + 1.5;
    const auto grad = policy_log_gradient(params, phi, action);
    std::vector<double> scaled_phi = phi;
    ActorCriticParams scaled_params = params;
    // Scale phi by c while keeping a - theta.phi fixed.
    const double c = 3.0;
    for (double& x : scaled_phi) x *= c;
    double scaled_mean = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) scaled_mean += params.theta[i] * scaled_phi[i];
    const auto scaled_grad =
        policy_log_gradient(scaled_params, scaled_phi, scaled_mean + 1.5);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      CHECK(scaled_grad[i] == doctest::Approx(c * grad[i]).epsilon(1e-9));
    }
  }
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

TEST_CASE("baseline_act: static is always the empty set") {
  DeterministicRng rng(10);
  const auto catalog = default_action_catalog(4);
  const std::vector<int> cells = {0, 1, 2};
  for (int i = 0; i < 20; ++i) {
    CHECK(baseline_act(AgentKind::Static, catalog, cells, rng).empty());
  }
}

TEST_CASE("baseline_act: singleton catalog always returns that action") {
  DeterministicRng rng(11);
  CellActionChoice only;
  only.subband_mask = 5u;
  const std::vector<CellActionChoice> catalog = {only};
  const std::vector<int> cells = {0};
  for (int i = 0; i < 20; ++i) {
    const ActionSet actions = baseline_act(AgentKind::Random, catalog, cells, rng);
    REQUIRE(actions.entries.size() == 1);
    CHECK(*actions.entries[0].subband_mask == 5u);
  }
}

TEST_CASE("baseline_act: random draws uniformly over the catalog") {
  DeterministicRng rng(12);
  const auto catalog = default_action_catalog(4);
  const std::vector<int> cells = {0};
  std::vector<int> counts(catalog.size(), 0);
  constexpr int kDraws = 22000;
  for (int i = 0; i < kDraws; ++i) {
    const ActionSet actions = baseline_act(AgentKind::Random, catalog, cells, rng);
    REQUIRE(actions.entries.size() == 1);
    const CellAction& a = actions.entries[0];
    for (std::size_t k = 0; k < catalog.size(); ++k) {
      if (a.power_delta_db == catalog[k].power_delta_db &&
          a.subband_mask == catalog[k].subband_mask && a.sleep == catalog[k].sleep) {
        ++counts[k];
        break;
      }
    }
  }
  const double expected = static_cast<double>(kDraws) / catalog.size();
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 21 dof, 99.9th percentile is 46.8.
  CHECK(chi2 < 46.8);
}

// ---------------------------------------------------------------------------
// Loop-facing agents
// ---------------------------------------------------------------------------

namespace {

TelemetryReport agent_report(int n_cells) {
  TelemetryReport report;
  for (int c = 0; c < n_cells; ++c) {
    CellTelemetry cell;
    cell.cell_id = c;
    cell.subband_mask = 0xF;
    cell.tx_power_dbm = 43.0;
    cell.prb_utilization = 0.6;
    cell.sinr_mean_db = 5.0;
    report.cells.push_back(cell);
  }
  report.jain_fairness = 0.8;
  return report;
}

}  // namespace

TEST_CASE("combined agent emits disjoint fields merged per cell") {
  AgentContext context;
  auto agent = make_agent(AgentKind::Combined, context);
  DeterministicRng rng(13);
  const ActionSet actions = agent->act(agent_report(3), rng);
  REQUIRE(actions.entries.size() == 3);
  for (const auto& entry : actions.entries) {
    CHECK(entry.subband_mask.has_value());
    CHECK(entry.power_delta_db.has_value());
    CHECK(!entry.sleep.has_value());
  }
}

TEST_CASE("subband agent anneals epsilon and resets on rollback") {
  AgentContext context;
  context.qlearn.anneal_steps = 10;
  auto agent = make_agent(AgentKind::QlearnSubband, context);
  DeterministicRng rng(14);
  const TelemetryReport report = agent_report(2);
  const ActionSet first = agent->act(report, rng);
  CHECK(agent->epsilon() == doctest::Approx(0.2));
  for (int i = 0; i < 10; ++i) agent->learn(report, first, 0.5, report);
  CHECK(agent->epsilon() == doctest::Approx(0.01));
  agent->reset_exploration();
  CHECK(agent->epsilon() == doctest::Approx(0.2));
}

TEST_CASE("ac agent resets parameters after divergence") {
  AgentContext context;
  auto agent = make_agent(AgentKind::ActorCriticPower, context);
  DeterministicRng rng(15);
  const TelemetryReport report = agent_report(1);
  ActionSet action = agent->act(report, rng);
  CHECK_THROWS_AS(
      agent->learn(report, action, std::numeric_limits<double>::infinity(), report),
      std::runtime_error);
  agent->reset_parameters();
  CHECK(*agent->ac_params() == ActorCriticParams{});
}
