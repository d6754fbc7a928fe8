#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ranloop/twin.hpp"

namespace ranloop {

struct CellTelemetry {
  int cell_id{0};
  bool active{true};               // at window end
  uint32_t subband_mask{0};        // at window end
  double tx_power_dbm{0.0};        // at window end
  std::optional<double> rsrp_mean_dbm;
  std::optional<double> rsrp_min_dbm;
  std::optional<double> sinr_mean_db;
  double harq_nack_ratio{0.0};
  double mean_buffer_bytes{0.0};
  double prb_utilization{0.0};
  double throughput_bps{0.0};
  double energy_j{0.0};
};

struct TelemetryReport {
  int64_t start_tti{0};
  int64_t end_tti{0};
  std::vector<CellTelemetry> cells;
  std::vector<double> ue_throughput_bps;
  double aggregate_se_bps_hz{0.0};
  double jain_fairness{1.0};
  double p95_delay_ms{0.0};
  double total_power_w{0.0};
  int max_unattached_ues{0};
};

struct ObjectiveWeights {
  double w_se{1.0};
  double w_fair{0.5};
  double w_lat{0.5};
  double w_energy{0.25};
  double se_ref_bps_hz{2.0};
  double lat_ref_ms{20.0};
  double p_ref_w{500.0};
  bool operator==(const ObjectiveWeights&) const = default;
};

struct RewardSignal {
  double total{0.0};
  double se_term{0.0};
  double fairness_term{0.0};
  double latency_penalty{0.0};
  double energy_penalty{0.0};
};

struct AnomalyReport {
  std::string metric;
  double z{0.0};
  int64_t sample_index{0};  // 1-based
  bool flagged{false};
};

struct CellDiscreteState {
  int load_level{0};          // 0..3 by PRB-utilization quartile
  int interference_level{0};  // 0..3 by mean-SINR thresholds, descending
  int mask_index{0};          // subband_mask - 1
  bool operator==(const CellDiscreteState&) const = default;
};

struct DiscreteState {
  std::vector<CellDiscreteState> cells;
  bool operator==(const DiscreteState&) const = default;
};

/// Windowed aggregation of per-TTI stats. Throws on an empty window.
TelemetryReport aggregate(std::span<const TtiStats> stats);

/// Jain's fairness index (sum x)^2 / (n sum x^2). Throws when all inputs are
/// zero ("undefined fairness") or any is negative.
double jain_index(std::span<const double> throughputs);

/// Maps a report to the scalar objective; each raw term is clamped to [0, 2]
/// before weighting.
RewardSignal compute_reward(const TelemetryReport& report, const ObjectiveWeights& weights);

/// EWMA mean/variance tracker with a warm-up guard; flags |z| > threshold.
/// The sample is tested against the pre-update statistics.
class AnomalyTracker {
 public:
  explicit AnomalyTracker(std::string metric, double alpha = 0.05,
                          double z_threshold = 4.0, int64_t warmup_samples = 20)
      : metric_(std::move(metric)),
        alpha_(alpha),
        z_threshold_(z_threshold),
        warmup_(warmup_samples) {}

  AnomalyReport observe(double sample);

  double mean() const { return mean_; }
  double variance() const { return var_; }
  int64_t samples_seen() const { return count_; }

 private:
  std::string metric_;
  double alpha_;
  double z_threshold_;
  int64_t warmup_;
  double mean_{0.0};
  double var_{0.0};
  int64_t count_{0};
};

/// Holt's linear-trend smoother (alpha = 0.3, beta = 0.1).
class HoltForecaster {
 public:
  HoltForecaster(double alpha = 0.3, double beta = 0.1) : alpha_(alpha), beta_(beta) {}

  void observe(double sample);
  /// Forecast `horizon` windows ahead, floored at 0. Needs >= 2 samples.
  double forecast(int64_t horizon) const;
  int64_t samples_seen() const { return count_; }

 private:
  double alpha_;
  double beta_;
  double level_{0.0};
  double trend_{0.0};
  int64_t count_{0};
};

/// Convenience form over a full history series.
double forecast_load(std::span<const double> history, int64_t horizon);

/// Tabular-agent state encoding; total and pure.
DiscreteState discretize_state(const TelemetryReport& report);
CellDiscreteState discretize_cell(const CellTelemetry& cell);

/// Number of distinct per-cell discrete states for a given sub-band count.
int discrete_state_count(int n_subbands);

/// Packs one cell's discrete state into a table key.
uint64_t state_key(const CellDiscreteState& s, int n_subbands);

}  // namespace ranloop
