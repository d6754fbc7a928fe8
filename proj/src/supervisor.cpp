#include "ranloop/supervisor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace ranloop {

std::string to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::Approved: return "approved";
    case VerdictStatus::Modified: return "modified";
    case VerdictStatus::Rejected: return "rejected";
  }
  return "rejected";
}

namespace {

const CellConfig* find_cell(std::span<const CellConfig> cells, int cell_id) {
  for (const auto& c : cells) {
    if (c.cell_id == cell_id) return &c;
  }
  return nullptr;
}

Verdict rejected(std::string reason, std::string detail) {
  Verdict v;
  v.status = VerdictStatus::Rejected;
  v.reject_reason = std::move(reason);
  v.reject_detail = std::move(detail);
  return v;
}

}  // namespace

Verdict validate_action(const SafetyEnvelope& envelope, std::span<const CellConfig> current,
                        const ActionSet& proposed) {
  Verdict verdict;
  if (proposed.empty()) return verdict;  // Approved no-op

  std::set<int> seen;
  for (const auto& entry : proposed.entries) {
    if (!seen.insert(entry.cell_id).second)
      return rejected("duplicate-cell",
                      "cell " + std::to_string(entry.cell_id) + " appears more than once");
    if (!find_cell(current, entry.cell_id))
      return rejected("unknown-cell", "cell " + std::to_string(entry.cell_id) + " does not exist");
    if (entry.power_delta_db && !std::isfinite(*entry.power_delta_db))
      return rejected("invalid-value", "non-finite power delta for cell " +
                                           std::to_string(entry.cell_id));
  }

  // Structural: the resulting active set must keep the coverage floor.
  int resulting_active = 0;
  for (const auto& c : current) {
    bool active = c.active;
    for (const auto& entry : proposed.entries) {
      if (entry.cell_id == c.cell_id && entry.sleep) active = !*entry.sleep;
    }
    if (active) ++resulting_active;
  }
  if (resulting_active < envelope.min_active_cells) {
    return rejected("min-active-cells",
                    "action leaves " + std::to_string(resulting_active) + " active cells, floor is " +
                        std::to_string(envelope.min_active_cells));
  }

  for (const auto& entry : proposed.entries) {
    const CellConfig& cell = *find_cell(current, entry.cell_id);
    const bool will_be_active = entry.sleep ? !*entry.sleep : cell.active;
    const uint32_t will_mask = entry.subband_mask ? *entry.subband_mask : cell.subband_mask;
    if (will_be_active && will_mask == 0) {
      return rejected("empty-mask",
                      "cell " + std::to_string(entry.cell_id) + " would be active with no sub-bands");
    }
  }

  bool modified = false;
  verdict.final_actions = proposed;
  for (auto& entry : verdict.final_actions.entries) {
    if (!entry.power_delta_db) continue;
    const CellConfig& cell = *find_cell(current, entry.cell_id);
    const double requested = *entry.power_delta_db;
    double delta = std::clamp(requested, -envelope.max_power_step_db, envelope.max_power_step_db);
    const double target =
        std::clamp(cell.tx_power_dbm + delta, envelope.power_min_dbm, envelope.power_max_dbm);
    delta = target - cell.tx_power_dbm;
    if (delta != requested) {
      modified = true;
      verdict.adjustments.push_back("cell " + std::to_string(entry.cell_id) +
                                    ": power delta clamped from " + std::to_string(requested) +
                                    " to " + std::to_string(delta) + " dB");
      entry.power_delta_db = delta;
    }
  }
  verdict.status = modified ? VerdictStatus::Modified : VerdictStatus::Approved;
  return verdict;
}

std::vector<ConfigUpdate> resolve_actions(std::span<const CellConfig> current,
                                          const ActionSet& actions) {
  std::vector<ConfigUpdate> updates;
  for (const auto& entry : actions.entries) {
    const CellConfig* cell = find_cell(current, entry.cell_id);
    if (!cell) throw std::invalid_argument("unknown cell");
    ConfigUpdate u;
    u.cell_id = entry.cell_id;
    if (entry.power_delta_db) u.tx_power_dbm = cell->tx_power_dbm + *entry.power_delta_db;
    if (entry.subband_mask) u.subband_mask = *entry.subband_mask;
    if (entry.sleep) u.active = !*entry.sleep;
    updates.push_back(u);
  }
  return updates;
}

ShadowResult shadow_evaluate(const TwinState& live, const ActionSet& validated,
                             const SafetyEnvelope& envelope, const ObjectiveWeights& weights,
                             double current_reward_ewma) {
  TwinState shadow = live.fork();
  shadow.clear_stats();
  shadow.apply_config(resolve_actions(shadow.cells(), validated));
  shadow.advance(envelope.shadow_horizon_tti);
  const auto stats = shadow.drain_stats();
  const TelemetryReport report = aggregate(stats);
  const RewardSignal reward = compute_reward(report, weights);

  ShadowResult result;
  result.predicted_reward = reward.total;
  result.p95_delay_ms = report.p95_delay_ms;
  result.min_rsrp_dbm = std::numeric_limits<double>::infinity();
  for (const auto& cell : report.cells) {
    if (cell.rsrp_min_dbm) result.min_rsrp_dbm = std::min(result.min_rsrp_dbm, *cell.rsrp_min_dbm);
  }
  if (report.max_unattached_ues > 0) {
    result.min_rsrp_dbm = -std::numeric_limits<double>::infinity();
  }

  if (result.min_rsrp_dbm < envelope.min_coverage_rsrp_dbm) {
    result.pass = false;
    result.fail_reason = "coverage";
  } else if (result.p95_delay_ms > envelope.mad_ms) {
    result.pass = false;
    result.fail_reason = "mad";
  } else if (result.predicted_reward < current_reward_ewma - envelope.shadow_tolerance) {
    result.pass = false;
    result.fail_reason = "reward-regression";
  }
  return result;
}

bool should_rollback(std::span<const double> interval_rewards, const Checkpoint& checkpoint,
                     const SafetyEnvelope& envelope) {
  const int n = envelope.degradation_windows;
  if (static_cast<int>(interval_rewards.size()) < n) return false;
  const double baseline = checkpoint.baseline_reward;
  const double threshold =
      baseline > 0.0 ? (1.0 - envelope.degradation_fraction) * baseline
                     : baseline - envelope.degradation_fraction * std::abs(baseline) - 1e-6;
  for (std::size_t i = interval_rewards.size() - n; i < interval_rewards.size(); ++i) {
    if (interval_rewards[i] >= threshold) return false;
  }
  return true;
}

void Supervisor::observe_reward(double total) {
  if (!ewma_init_) {
    reward_ewma_ = total;
    ewma_init_ = true;
  } else {
    reward_ewma_ = (1.0 - kRewardEwmaAlpha) * reward_ewma_ + kRewardEwmaAlpha * total;
  }
  history_.push_back(total);
}

const Checkpoint& Supervisor::make_checkpoint(int64_t tti, std::span<const CellConfig> configs) {
  Checkpoint cp;
  cp.id = next_id_++;
  cp.tti = tti;
  cp.configs.assign(configs.begin(), configs.end());
  cp.baseline_reward = reward_ewma_;
  checkpoints_.push_back(std::move(cp));
  history_.clear();  // degradation is measured against the new baseline
  return checkpoints_.back();
}

const Checkpoint& Supervisor::latest_checkpoint() const {
  if (checkpoints_.empty()) throw std::runtime_error("no checkpoint");
  return checkpoints_.back();
}

bool Supervisor::should_rollback() const {
  if (checkpoints_.empty()) return false;
  return ranloop::should_rollback(history_, checkpoints_.back(), envelope_);
}

void Supervisor::rollback(TwinState& twin) {
  if (checkpoints_.empty()) throw std::runtime_error("no checkpoint");
  const Checkpoint& cp = checkpoints_.back();
  std::vector<ConfigUpdate> updates;
  for (const auto& config : cp.configs) {
    ConfigUpdate u;
    u.cell_id = config.cell_id;
    u.tx_power_dbm = config.tx_power_dbm;
    u.subband_mask = config.subband_mask;
    u.active = config.active;
    updates.push_back(u);
  }
  twin.apply_config(updates);
  history_.clear();
}

void Supervisor::restore(std::vector<Checkpoint> checkpoints, uint64_t next_id,
                         double reward_ewma, bool ewma_initialized, std::vector<double> history) {
  checkpoints_ = std::move(checkpoints);
  next_id_ = next_id;
  reward_ewma_ = reward_ewma;
  ewma_init_ = ewma_initialized;
  history_ = std::move(history);
}

}  // namespace ranloop
