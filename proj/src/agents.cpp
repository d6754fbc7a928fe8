#include "ranloop/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ranloop {

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Static: return "static";
    case AgentKind::Random: return "random";
    case AgentKind::QlearnSubband: return "qlearn_subband";
    case AgentKind::ActorCriticPower: return "actorcritic_power";
    case AgentKind::Combined: return "combined";
  }
  return "static";
}

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "static") return AgentKind::Static;
  if (name == "random") return AgentKind::Random;
  if (name == "qlearn_subband") return AgentKind::QlearnSubband;
  if (name == "actorcritic_power") return AgentKind::ActorCriticPower;
  if (name == "combined") return AgentKind::Combined;
  throw std::invalid_argument("unknown agent kind: " + name);
}

// ---------------------------------------------------------------------------
// QTable
// ---------------------------------------------------------------------------

double QTable::get(uint64_t state, int action) const {
  const auto it = values_.find(key(state, action));
  return it == values_.end() ? 0.0 : it->second;
}

void QTable::set(uint64_t state, int action, double value) {
  values_[key(state, action)] = value;
}

double QTable::max_over_actions(uint64_t state, int n_actions) const {
  double best = get(state, 0);
  for (int a = 1; a < n_actions; ++a) best = std::max(best, get(state, a));
  return best;
}

int QTable::argmax(uint64_t state, int n_actions) const {
  int best = 0;
  double best_value = get(state, 0);
  for (int a = 1; a < n_actions; ++a) {
    const double v = get(state, a);
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

double QTable::max_value() const {
  double best = 0.0;
  for (const auto& [k, v] : values_) best = std::max(best, v);
  return best;
}

int q_select(const QTable& table, uint64_t state, int n_actions, double epsilon,
             DeterministicRng& rng) {
  if (rng.uniform(RngStream::Agent) < epsilon) {
    return rng.uniform_int(RngStream::Agent, n_actions);
  }
  return table.argmax(state, n_actions);
}

void q_update(QTable& table, uint64_t state, int action, double reward,
              uint64_t next_state, int n_actions, double alpha, double gamma) {
  if (!std::isfinite(reward)) throw std::invalid_argument("invalid reward");
  const double q = table.get(state, action);
  const double target = reward + gamma * table.max_over_actions(next_state, n_actions);
  table.set(state, action, q + alpha * (target - q));
}

// ---------------------------------------------------------------------------
// Actor-critic
// ---------------------------------------------------------------------------

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double ac_act(const ActorCriticParams& params, std::span<const double> features,
              DeterministicRng& rng) {
  if (features.size() != params.theta.size())
    throw std::invalid_argument("feature dimension mismatch");
  const double mean = dot(params.theta, features);
  return mean + params.sigma * rng.normal(RngStream::Agent);
}

void ac_update(ActorCriticParams& params, std::span<const double> features,
               double action, double reward, std::span<const double> next_features) {
  if (features.size() != params.theta.size() || next_features.size() != params.theta.size())
    throw std::invalid_argument("feature dimension mismatch");
  const double v = dot(params.w, features);
  const double v_next = dot(params.w, next_features);
  const double delta = reward + params.gamma * v_next - v;
  if (!std::isfinite(delta)) throw std::runtime_error("diverged");
  const double score_scale = (action - dot(params.theta, features)) / (params.sigma * params.sigma);
  for (std::size_t i = 0; i < params.theta.size(); ++i) {
    params.w[i] += params.alpha_critic * delta * features[i];
    params.theta[i] += params.alpha_actor * delta * score_scale * features[i];
  }
}

std::vector<double> policy_log_gradient(const ActorCriticParams& params,
                                        std::span<const double> features, double action) {
  const double scale = (action - dot(params.theta, features)) / (params.sigma * params.sigma);
  std::vector<double> grad(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) grad[i] = scale * features[i];
  return grad;
}

std::vector<double> ac_features(const TelemetryReport& report, const CellTelemetry& cell,
                                double power_min_dbm, double power_max_dbm) {
  const double span = std::max(power_max_dbm - power_min_dbm, 1e-9);
  const double sinr = cell.sinr_mean_db.value_or(15.0);
  return {
      1.0,
      std::clamp(cell.prb_utilization, 0.0, 1.0),
      std::clamp((sinr + 5.0) / 30.0, 0.0, 1.0),
      std::clamp((cell.tx_power_dbm - power_min_dbm) / span, 0.0, 1.0),
      std::clamp(report.jain_fairness, 0.0, 1.0),
  };
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

std::vector<CellActionChoice> default_action_catalog(int n_subbands) {
  std::vector<CellActionChoice> catalog;
  const uint32_t n_masks = (1u << n_subbands) - 1;
  for (uint32_t mask = 1; mask <= n_masks; ++mask) {
    CellActionChoice choice;
    choice.subband_mask = mask;
    catalog.push_back(choice);
  }
  for (double delta : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    CellActionChoice choice;
    choice.power_delta_db = delta;
    catalog.push_back(choice);
  }
  CellActionChoice sleep_choice;
  sleep_choice.sleep = true;
  catalog.push_back(sleep_choice);
  CellActionChoice wake_choice;
  wake_choice.sleep = false;
  catalog.push_back(wake_choice);
  return catalog;
}

ActionSet baseline_act(AgentKind kind, std::span<const CellActionChoice> catalog,
                       std::span<const int> cell_ids, DeterministicRng& rng) {
  ActionSet actions;
  if (kind == AgentKind::Static || catalog.empty()) return actions;
  if (kind != AgentKind::Random)
    throw std::invalid_argument("baseline_act only handles static and random");
  for (int cell_id : cell_ids) {
    const auto& choice = catalog[rng.uniform_int(RngStream::Agent, static_cast<int>(catalog.size()))];
    CellAction action;
    action.cell_id = cell_id;
    action.power_delta_db = choice.power_delta_db;
    action.subband_mask = choice.subband_mask;
    action.sleep = choice.sleep;
    actions.entries.push_back(action);
  }
  return actions;
}

// ---------------------------------------------------------------------------
// Loop-facing agents
// ---------------------------------------------------------------------------

namespace {

class StaticAgent final : public Agent {
 public:
  AgentKind kind() const override { return AgentKind::Static; }
  ActionSet act(const TelemetryReport&, DeterministicRng&) override { return {}; }
  void learn(const TelemetryReport&, const ActionSet&, double, const TelemetryReport&) override {}
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(const AgentContext& context)
      : catalog_(default_action_catalog(context.n_subbands)) {}

  AgentKind kind() const override { return AgentKind::Random; }

  ActionSet act(const TelemetryReport& report, DeterministicRng& rng) override {
    std::vector<int> cell_ids;
    for (const auto& cell : report.cells) cell_ids.push_back(cell.cell_id);
    return baseline_act(AgentKind::Random, catalog_, cell_ids, rng);
  }

  void learn(const TelemetryReport&, const ActionSet&, double, const TelemetryReport&) override {}

 private:
  std::vector<CellActionChoice> catalog_;
};

class SubbandQAgent final : public Agent {
 public:
  explicit SubbandQAgent(const AgentContext& context)
      : config_(context.qlearn),
        n_subbands_(context.n_subbands),
        n_actions_((1 << context.n_subbands) - 1),
        epsilon_(context.qlearn.epsilon_initial) {}

  AgentKind kind() const override { return AgentKind::QlearnSubband; }

  ActionSet act(const TelemetryReport& report, DeterministicRng& rng) override {
    ActionSet actions;
    const DiscreteState state = discretize_state(report);
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
      const int action = q_select(table_, state_key(state.cells[c], n_subbands_), n_actions_,
                                  epsilon_, rng);
      CellAction entry;
      entry.cell_id = report.cells[c].cell_id;
      entry.subband_mask = static_cast<uint32_t>(action + 1);
      actions.entries.push_back(entry);
    }
    return actions;
  }

  void learn(const TelemetryReport& prev_report, const ActionSet& prev_action, double reward,
             const TelemetryReport& report) override {
    const DiscreteState prev = discretize_state(prev_report);
    const DiscreteState next = discretize_state(report);
    for (const auto& entry : prev_action.entries) {
      if (!entry.subband_mask) continue;
      const auto c = static_cast<std::size_t>(entry.cell_id);
      if (c >= prev.cells.size() || c >= next.cells.size()) continue;
      q_update(table_, state_key(prev.cells[c], n_subbands_),
               static_cast<int>(*entry.subband_mask) - 1, reward,
               state_key(next.cells[c], n_subbands_), n_actions_, config_.alpha,
               config_.gamma);
    }
    ++learn_steps_;
    anneal();
  }

  void reset_exploration() override { epsilon_ = config_.epsilon_initial; }

  AgentDiagnostics diagnostics() const override {
    return {.epsilon = epsilon_, .max_q = table_.max_value(), .theta_norm = 0.0};
  }

  const QTable* qtable() const override { return &table_; }
  QTable* qtable_mutable() override { return &table_; }
  double epsilon() const override { return epsilon_; }
  void set_epsilon(double e) override { epsilon_ = e; }
  int64_t learn_steps() const override { return learn_steps_; }
  void set_learn_steps(int64_t n) override { learn_steps_ = n; }

 private:
  void anneal() {
    const double step =
        (config_.epsilon_initial - config_.epsilon_final) /
        static_cast<double>(std::max<int64_t>(config_.anneal_steps, 1));
    epsilon_ = std::max(config_.epsilon_final, epsilon_ - step);
  }

  QLearnConfig config_;
  int n_subbands_;
  int n_actions_;
  double epsilon_;
  int64_t learn_steps_{0};
  QTable table_;
};

class PowerAcAgent final : public Agent {
 public:
  explicit PowerAcAgent(const AgentContext& context)
      : params_(context.ac_init),
        initial_(context.ac_init),
        power_min_(context.power_min_dbm),
        power_max_(context.power_max_dbm) {}

  AgentKind kind() const override { return AgentKind::ActorCriticPower; }

  ActionSet act(const TelemetryReport& report, DeterministicRng& rng) override {
    ActionSet actions;
    for (const auto& cell : report.cells) {
      CellAction entry;
      entry.cell_id = cell.cell_id;
      entry.power_delta_db = ac_act(params_, ac_features(report, cell, power_min_, power_max_), rng);
      actions.entries.push_back(entry);
    }
    return actions;
  }

  void learn(const TelemetryReport& prev_report, const ActionSet& prev_action, double reward,
             const TelemetryReport& report) override {
    for (const auto& entry : prev_action.entries) {
      if (!entry.power_delta_db) continue;
      const auto c = static_cast<std::size_t>(entry.cell_id);
      if (c >= prev_report.cells.size() || c >= report.cells.size()) continue;
      ac_update(params_, ac_features(prev_report, prev_report.cells[c], power_min_, power_max_),
                *entry.power_delta_db, reward,
                ac_features(report, report.cells[c], power_min_, power_max_));
    }
    ++learn_steps_;
  }

  void reset_parameters() override { params_ = initial_; }

  AgentDiagnostics diagnostics() const override {
    double norm_sq = 0.0;
    for (double t : params_.theta) norm_sq += t * t;
    return {.epsilon = 0.0, .max_q = 0.0, .theta_norm = std::sqrt(norm_sq)};
  }

  const ActorCriticParams* ac_params() const override { return &params_; }
  ActorCriticParams* ac_params_mutable() override { return &params_; }
  int64_t learn_steps() const override { return learn_steps_; }
  void set_learn_steps(int64_t n) override { learn_steps_ = n; }

 private:
  ActorCriticParams params_;
  ActorCriticParams initial_;
  double power_min_;
  double power_max_;
  int64_t learn_steps_{0};
};

/// Joint sub-band + power control: disjoint action fields merged per cell.
class CombinedAgent final : public Agent {
 public:
  explicit CombinedAgent(const AgentContext& context)
      : subband_(context), power_(context) {}

  AgentKind kind() const override { return AgentKind::Combined; }

  ActionSet act(const TelemetryReport& report, DeterministicRng& rng) override {
    ActionSet masks = subband_.act(report, rng);
    const ActionSet deltas = power_.act(report, rng);
    for (std::size_t i = 0; i < masks.entries.size() && i < deltas.entries.size(); ++i) {
      masks.entries[i].power_delta_db = deltas.entries[i].power_delta_db;
    }
    return masks;
  }

  void learn(const TelemetryReport& prev_report, const ActionSet& prev_action, double reward,
             const TelemetryReport& report) override {
    subband_.learn(prev_report, prev_action, reward, report);
    power_.learn(prev_report, prev_action, reward, report);
  }

  void reset_exploration() override { subband_.reset_exploration(); }
  void reset_parameters() override { power_.reset_parameters(); }

  AgentDiagnostics diagnostics() const override {
    AgentDiagnostics d = subband_.diagnostics();
    d.theta_norm = power_.diagnostics().theta_norm;
    return d;
  }

  const QTable* qtable() const override { return subband_.qtable(); }
  QTable* qtable_mutable() override { return subband_.qtable_mutable(); }
  const ActorCriticParams* ac_params() const override { return power_.ac_params(); }
  ActorCriticParams* ac_params_mutable() override { return power_.ac_params_mutable(); }
  double epsilon() const override { return subband_.epsilon(); }
  void set_epsilon(double e) override { subband_.set_epsilon(e); }
  int64_t learn_steps() const override { return subband_.learn_steps(); }
  void set_learn_steps(int64_t n) override {
    subband_.set_learn_steps(n);
    power_.set_learn_steps(n);
  }

 private:
  SubbandQAgent subband_;
  PowerAcAgent power_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentContext& context) {
  switch (kind) {
    case AgentKind::Static: return std::make_unique<StaticAgent>();
    case AgentKind::Random: return std::make_unique<RandomAgent>(context);
    case AgentKind::QlearnSubband: return std::make_unique<SubbandQAgent>(context);
    case AgentKind::ActorCriticPower: return std::make_unique<PowerAcAgent>(context);
    case AgentKind::Combined: return std::make_unique<CombinedAgent>(context);
  }
  throw std::invalid_argument("unknown agent kind");
}

}  // namespace ranloop
