#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ranloop/actions.hpp"
#include "ranloop/observer.hpp"
#include "ranloop/rng.hpp"

namespace ranloop {

enum class AgentKind {
  Static,
  Random,
  QlearnSubband,
  ActorCriticPower,
  Combined,
};

std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Tabular Q-learning
// ---------------------------------------------------------------------------

struct QLearnConfig {
  double alpha{0.1};
  double gamma{0.9};
  double epsilon_initial{0.2};
  double epsilon_final{0.01};
  int64_t anneal_steps{100};
  bool operator==(const QLearnConfig&) const = default;
};

/// Sparse table; lookup of an unseen (state, action) pair is exactly 0.
class QTable {
 public:
  double get(uint64_t state, int action) const;
  void set(uint64_t state, int action, double value);
  double max_over_actions(uint64_t state, int n_actions) const;
  int argmax(uint64_t state, int n_actions) const;  // ties -> lowest action id
  std::size_t size() const { return values_.size(); }
  double max_value() const;

  /// Deterministically ordered (key, value) view for serialization.
  const std::map<uint64_t, double>& entries() const { return values_; }
  std::map<uint64_t, double>& entries_mutable() { return values_; }

 private:
  static uint64_t key(uint64_t state, int action) { return state * 64 + action; }
  std::map<uint64_t, double> values_;
};

/// Epsilon-greedy selection over the non-empty sub-band mask catalog.
int q_select(const QTable& table, uint64_t state, int n_actions, double epsilon,
             DeterministicRng& rng);

/// One-step Q-learning backup; touches exactly one entry. Throws on a
/// non-finite reward.
void q_update(QTable& table, uint64_t state, int action, double reward,
              uint64_t next_state, int n_actions, double alpha, double gamma);

// ---------------------------------------------------------------------------
// Linear-Gaussian actor-critic
// ---------------------------------------------------------------------------

inline constexpr int kAcFeatureDim = 5;

struct ActorCriticParams {
  std::vector<double> theta = std::vector<double>(kAcFeatureDim, 0.0);
  std::vector<double> w = std::vector<double>(kAcFeatureDim, 0.0);
  double sigma{1.0};
  double alpha_actor{1e-3};
  double alpha_critic{1e-2};
  double gamma{0.9};
  bool operator==(const ActorCriticParams&) const = default;
};

/// Samples a ~ Normal(theta . phi, sigma); returned unclamped (the
/// supervisor owns limits). Throws on a feature-dimension mismatch.
double ac_act(const ActorCriticParams& params, std::span<const double> features,
              DeterministicRng& rng);

/// TD(0) critic and policy-gradient actor step. Throws "diverged" when the
/// TD error is not finite; the caller resets the parameters.
void ac_update(ActorCriticParams& params, std::span<const double> features,
               double action, double reward, std::span<const double> next_features);

/// grad_theta log Normal(a; theta . phi, sigma^2) = ((a - theta.phi)/sigma^2) phi.
std::vector<double> policy_log_gradient(const ActorCriticParams& params,
                                        std::span<const double> features, double action);

/// Feature map [1, load, sinr_norm, power_norm, fairness] for one cell.
std::vector<double> ac_features(const TelemetryReport& report, const CellTelemetry& cell,
                                double power_min_dbm, double power_max_dbm);

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// static -> empty set; random -> one uniform catalog pick per controlled cell.
ActionSet baseline_act(AgentKind kind, std::span<const CellActionChoice> catalog,
                       std::span<const int> cell_ids, DeterministicRng& rng);

/// Catalog used by the random baseline: every non-empty mask, the discrete
/// power deltas, and both sleep toggles.
std::vector<CellActionChoice> default_action_catalog(int n_subbands);

// ---------------------------------------------------------------------------
// Decision-maker interface used by the control loop
// ---------------------------------------------------------------------------

struct AgentDiagnostics {
  double epsilon{0.0};
  double max_q{0.0};
  double theta_norm{0.0};
  bool reset{false};
};

struct AgentContext {
  int n_subbands{4};
  double power_min_dbm{0.0};
  double power_max_dbm{46.0};
  QLearnConfig qlearn{};
  ActorCriticParams ac_init{};
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentKind kind() const = 0;
  virtual ActionSet act(const TelemetryReport& report, DeterministicRng& rng) = 0;
  virtual void learn(const TelemetryReport& prev_report, const ActionSet& prev_action,
                     double reward, const TelemetryReport& report) = 0;
  virtual void reset_exploration() {}
  /// Re-initializes learned parameters after divergence.
  virtual void reset_parameters() {}
  virtual AgentDiagnostics diagnostics() const { return {}; }

  // Checkpoint access; unused parts stay at defaults.
  virtual const QTable* qtable() const { return nullptr; }
  virtual QTable* qtable_mutable() { return nullptr; }
  virtual const ActorCriticParams* ac_params() const { return nullptr; }
  virtual ActorCriticParams* ac_params_mutable() { return nullptr; }
  virtual double epsilon() const { return 0.0; }
  virtual void set_epsilon(double) {}
  virtual int64_t learn_steps() const { return 0; }
  virtual void set_learn_steps(int64_t) {}
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentContext& context);

}  // namespace ranloop
