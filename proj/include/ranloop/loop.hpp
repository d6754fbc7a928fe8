#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ranloop/agents.hpp"
#include "ranloop/observer.hpp"
#include "ranloop/rng.hpp"
#include "ranloop/scenario.hpp"
#include "ranloop/supervisor.hpp"
#include "ranloop/twin.hpp"

namespace ranloop {

/// One decision interval's worth of loop output.
struct RunRecord {
  int64_t tti{0};  // end of the interval
  TelemetryReport report;
  RewardSignal reward;
  ActionSet proposed;
  Verdict verdict;
  bool shadow_run{false};
  ShadowResult shadow;
  bool applied{false};
  bool rollback{false};
  uint64_t checkpoint_id{0};  // non-zero when a checkpoint was taken
  AgentDiagnostics diagnostics;
};

/// Streaming consumer for export; run_episode also returns everything.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void on_record(const RunRecord& record) = 0;
};

/// Portable snapshot of a trained agent, sufficient to reproduce its next
/// decision given the same report and restored RNG cursor.
struct PersistedAgentState {
  AgentKind kind{AgentKind::Static};
  double epsilon{0.0};
  int64_t learn_steps{0};
  QLearnConfig qlearn{};
  QTable qtable{};
  ActorCriticParams ac{};
  DeterministicRng rng{};
};

struct PersistedSupervisorState {
  std::vector<Checkpoint> checkpoints;
  uint64_t next_checkpoint_id{1};
  double reward_ewma{0.0};
  bool ewma_initialized{false};
  std::vector<double> reward_history;
};

struct EpisodeResult {
  std::vector<RunRecord> records;
  std::vector<CellConfig> final_configs;
  uint64_t final_state_hash{0};
  int rollback_count{0};
  int applied_count{0};
  PersistedAgentState agent_state;
  PersistedSupervisorState supervisor_state;
};

struct EpisodeOptions {
  RecordSink* sink{nullptr};
  const PersistedAgentState* resume_agent{nullptr};
  std::optional<AgentKind> agent_override;
  std::optional<int64_t> total_ttis_override;
};

/// Runs the closed loop: advance, aggregate, reward, learn, act, validate,
/// shadow, actuate, checkpoint, rollback. Deterministic in (scenario, seed,
/// options).
EpisodeResult run_episode(const Scenario& scenario, uint64_t seed,
                          const EpisodeOptions& options = {});

/// Mean RunRecord reward over the final quarter of the episode.
double final_quarter_mean_reward(const std::vector<RunRecord>& records);

}  // namespace ranloop
