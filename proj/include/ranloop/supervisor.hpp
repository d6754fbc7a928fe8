#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ranloop/actions.hpp"
#include "ranloop/observer.hpp"
#include "ranloop/twin.hpp"

namespace ranloop {

struct SafetyEnvelope {
  double power_min_dbm{0.0};
  double power_max_dbm{46.0};
  double max_power_step_db{3.0};
  double min_coverage_rsrp_dbm{-115.0};
  double mad_ms{50.0};            // maximum allowed delay for twin-predicted p95
  int min_active_cells{1};
  double degradation_fraction{0.15};
  int degradation_windows{5};
  int64_t shadow_horizon_tti{500};
  double shadow_tolerance{0.05};  // reward units
  bool operator==(const SafetyEnvelope&) const = default;
};

enum class VerdictStatus { Approved, Modified, Rejected };

std::string to_string(VerdictStatus status);

struct Verdict {
  VerdictStatus status{VerdictStatus::Approved};
  ActionSet final_actions;                 // meaningful unless Rejected
  std::vector<std::string> adjustments;    // one note per clamp
  std::string reject_reason;               // exactly one primary reason
  std::string reject_detail;
};

/// Bound checks: power deltas are clamped (Modified), structural violations
/// (min-active-cells, empty mask, unknown cell) are Rejected.
Verdict validate_action(const SafetyEnvelope& envelope, std::span<const CellConfig> current,
                        const ActionSet& proposed);

/// Turns a validated ActionSet into absolute per-cell config updates.
std::vector<ConfigUpdate> resolve_actions(std::span<const CellConfig> current,
                                          const ActionSet& actions);

struct ShadowResult {
  bool pass{true};
  double predicted_reward{0.0};
  double min_rsrp_dbm{0.0};
  double p95_delay_ms{0.0};
  std::string fail_reason;  // "coverage" | "mad" | "reward-regression"
};

/// Forks the live twin, applies the action, advances the shadow horizon, and
/// grades the predicted window. The live twin is never touched.
ShadowResult shadow_evaluate(const TwinState& live, const ActionSet& validated,
                             const SafetyEnvelope& envelope, const ObjectiveWeights& weights,
                             double current_reward_ewma);

struct Checkpoint {
  uint64_t id{0};
  int64_t tti{0};
  std::vector<CellConfig> configs;
  double baseline_reward{0.0};
  bool operator==(const Checkpoint&) const = default;
};

/// True when the last N consecutive interval rewards all fall below the
/// degradation threshold relative to the checkpoint baseline.
bool should_rollback(std::span<const double> interval_rewards, const Checkpoint& checkpoint,
                     const SafetyEnvelope& envelope);

/// Owns checkpoints, the reward EWMA used as the shadow baseline, and the
/// post-actuation reward history.
class Supervisor {
 public:
  explicit Supervisor(SafetyEnvelope envelope) : envelope_(std::move(envelope)) {}

  const SafetyEnvelope& envelope() const { return envelope_; }

  Verdict validate(std::span<const CellConfig> current, const ActionSet& proposed) const {
    return validate_action(envelope_, current, proposed);
  }

  ShadowResult shadow(const TwinState& live, const ActionSet& validated,
                      const ObjectiveWeights& weights) const {
    return shadow_evaluate(live, validated, envelope_, weights, reward_ewma_);
  }

  /// Feeds one decision-interval reward into the EWMA and history.
  void observe_reward(double total);

  const Checkpoint& make_checkpoint(int64_t tti, std::span<const CellConfig> configs);

  bool has_checkpoint() const { return !checkpoints_.empty(); }
  const Checkpoint& latest_checkpoint() const;
  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }

  bool should_rollback() const;

  /// Restores the latest checkpoint's configs onto the twin. Traffic and UE
  /// state are not rewound. Throws when no checkpoint exists.
  void rollback(TwinState& twin);

  double reward_ewma() const { return reward_ewma_; }
  std::span<const double> reward_history() const { return history_; }

  // Checkpoint-file restore hooks.
  void restore(std::vector<Checkpoint> checkpoints, uint64_t next_id, double reward_ewma,
               bool ewma_initialized, std::vector<double> history);
  uint64_t next_checkpoint_id() const { return next_id_; }
  bool ewma_initialized() const { return ewma_init_; }

  static constexpr double kRewardEwmaAlpha = 0.2;

 private:
  SafetyEnvelope envelope_;
  std::vector<Checkpoint> checkpoints_;
  uint64_t next_id_{1};
  double reward_ewma_{0.0};
  bool ewma_init_{false};
  std::vector<double> history_;  // rewards since the latest checkpoint or rollback
};

}  // namespace ranloop
