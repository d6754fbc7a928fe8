#include "ranloop/loop.hpp"

#include <stdexcept>

#include "ranloop/log.hpp"

namespace ranloop {

namespace {

constexpr uint64_t kAgentSeedSalt = 0x5EEDA9EA75ULL;

PersistedAgentState snapshot_agent(const Agent& agent, const AgentContext& context,
                                   const DeterministicRng& rng) {
  PersistedAgentState state;
  state.kind = agent.kind();
  state.epsilon = agent.epsilon();
  state.learn_steps = agent.learn_steps();
  state.qlearn = context.qlearn;
  if (const QTable* table = agent.qtable()) state.qtable = *table;
  if (const ActorCriticParams* params = agent.ac_params()) state.ac = *params;
  state.rng = rng;
  return state;
}

void restore_agent(Agent& agent, const PersistedAgentState& state) {
  agent.set_epsilon(state.epsilon);
  agent.set_learn_steps(state.learn_steps);
  if (QTable* table = agent.qtable_mutable()) *table = state.qtable;
  if (ActorCriticParams* params = agent.ac_params_mutable()) *params = state.ac;
}

}  // namespace

EpisodeResult run_episode(const Scenario& scenario, uint64_t seed,
                          const EpisodeOptions& options) {
  Scenario run_scenario = scenario;
  if (options.agent_override) run_scenario.loop.agent = *options.agent_override;
  if (options.total_ttis_override) run_scenario.loop.total_ttis = *options.total_ttis_override;
  const LoopConfig& loop = run_scenario.loop;

  TwinState twin = TwinState::create(run_scenario.twin_init(), seed);
  Supervisor supervisor(run_scenario.envelope);

  const int64_t n_intervals = loop.total_ttis / loop.decision_interval;

  AgentContext context;
  context.n_subbands = run_scenario.n_subbands;
  context.power_min_dbm = run_scenario.envelope.power_min_dbm;
  context.power_max_dbm = run_scenario.envelope.power_max_dbm;
  context.qlearn.anneal_steps = std::max<int64_t>(n_intervals - 1, 1);

  std::unique_ptr<Agent> agent = make_agent(loop.agent, context);
  DeterministicRng agent_rng(seed ^ kAgentSeedSalt);
  if (options.resume_agent) {
    if (options.resume_agent->kind != agent->kind())
      throw std::invalid_argument("resume state is for a different agent kind");
    restore_agent(*agent, *options.resume_agent);
    agent_rng = options.resume_agent->rng;
  }

  supervisor.make_checkpoint(0, twin.cells());

  EpisodeResult result;
  result.records.reserve(n_intervals);

  std::optional<TelemetryReport> prev_report;
  ActionSet prev_action;

  for (int64_t interval = 1; interval <= n_intervals; ++interval) {
    RunRecord record;

    // (1) Advance the live twin one decision interval.
    twin.advance(loop.decision_interval);
    record.tti = twin.tti();

    // (2) Aggregate telemetry and map to the reward signal.
    const auto stats = twin.drain_stats();
    record.report = aggregate(stats);
    record.reward = compute_reward(record.report, run_scenario.weights);
    supervisor.observe_reward(record.reward.total);

    // (3) Learning update from the previous transition.
    if (prev_report) {
      try {
        agent->learn(*prev_report, prev_action, record.reward.total, record.report);
      } catch (const std::exception& e) {
        log::info(std::string("agent reset after divergence: ") + e.what());
        agent->reset_parameters();
        record.diagnostics.reset = true;
      }
    }

    // (4) Agent proposes from the just-completed (delayed) window.
    record.proposed = agent->act(record.report, agent_rng);

    // (5) Bound validation, then (6) shadow gating and actuation.
    record.verdict = supervisor.validate(twin.cells(), record.proposed);
    if (record.verdict.status != VerdictStatus::Rejected &&
        !record.verdict.final_actions.empty()) {
      bool actuate = true;
      if (loop.shadow_enabled) {
        record.shadow = supervisor.shadow(twin, record.verdict.final_actions,
                                          run_scenario.weights);
        record.shadow_run = true;
        actuate = record.shadow.pass;
      }
      if (actuate) {
        twin.apply_config(resolve_actions(twin.cells(), record.verdict.final_actions));
        record.applied = true;
        ++result.applied_count;
      }
    }

    // (7) Checkpoint on cadence.
    if (interval % loop.checkpoint_interval == 0) {
      record.checkpoint_id = supervisor.make_checkpoint(twin.tti(), twin.cells()).id;
    }

    // (8) Degradation check; rollback also resets exploration.
    if (supervisor.should_rollback()) {
      supervisor.rollback(twin);
      agent->reset_exploration();
      record.rollback = true;
      ++result.rollback_count;
      log::info("rollback at tti " + std::to_string(twin.tti()));
    }

    // (9) Emit the record.
    const AgentDiagnostics diag = agent->diagnostics();
    record.diagnostics.epsilon = diag.epsilon;
    record.diagnostics.max_q = diag.max_q;
    record.diagnostics.theta_norm = diag.theta_norm;
    if (options.sink) options.sink->on_record(record);
    result.records.push_back(std::move(record));

    prev_report = result.records.back().report;
    prev_action = result.records.back().proposed;
  }

  result.final_configs = twin.cells();
  result.final_state_hash = twin.state_hash();
  result.agent_state = snapshot_agent(*agent, context, agent_rng);
  result.supervisor_state.checkpoints = supervisor.checkpoints();
  result.supervisor_state.next_checkpoint_id = supervisor.next_checkpoint_id();
  result.supervisor_state.reward_ewma = supervisor.reward_ewma();
  result.supervisor_state.ewma_initialized = supervisor.ewma_initialized();
  result.supervisor_state.reward_history.assign(supervisor.reward_history().begin(),
                                                supervisor.reward_history().end());
  return result;
}

double final_quarter_mean_reward(const std::vector<RunRecord>& records) {
  if (records.empty()) return 0.0;
  const std::size_t start = records.size() - std::max<std::size_t>(records.size() / 4, 1);
  double sum = 0.0;
  for (std::size_t i = start; i < records.size(); ++i) sum += records[i].reward.total;
  return sum / static_cast<double>(records.size() - start);
}

}  // namespace ranloop
