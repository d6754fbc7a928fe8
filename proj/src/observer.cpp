#include "ranloop/observer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ranloop {

TelemetryReport aggregate(std::span<const TtiStats> stats) {
  if (stats.empty()) throw std::runtime_error("empty window");

  TelemetryReport report;
  report.start_tti = stats.front().tti;
  report.end_tti = stats.back().tti;
  const double window_s = static_cast<double>(stats.size()) * kTtiSeconds;

  const std::size_t n_cells = stats.front().cells.size();
  const std::size_t n_ues = stats.front().ues.size();
  report.cells.resize(n_cells);
  report.ue_throughput_bps.assign(n_ues, 0.0);

  std::vector<int64_t> cell_delivered(n_cells, 0);
  std::vector<int64_t> cell_alloc(n_cells, 0), cell_avail(n_cells, 0);
  std::vector<int64_t> cell_tx(n_cells, 0), cell_nack(n_cells, 0);
  std::vector<double> cell_buffer_bits(n_cells, 0.0);
  std::vector<double> rsrp_mean_sum(n_cells, 0.0), sinr_mean_sum(n_cells, 0.0);
  std::vector<double> rsrp_min(n_cells, std::numeric_limits<double>::infinity());
  std::vector<int64_t> channel_rows(n_cells, 0);

  std::vector<double> delays;
  int64_t total_delivered = 0;
  double total_energy_j = 0.0;
  double carrier_hz_seconds = 0.0;

  for (const auto& row : stats) {
    report.max_unattached_ues = std::max(report.max_unattached_ues, row.unattached_ues);
    for (const auto& u : row.ues) {
      report.ue_throughput_bps[u.ue_id] += static_cast<double>(u.delivered_bits);
      total_delivered += u.delivered_bits;
      if (u.serviced) delays.push_back(u.hol_delay_ms);
      if (u.serving_cell >= 0) {
        cell_delivered[u.serving_cell] += u.delivered_bits;
        cell_tx[u.serving_cell] += u.harq_tx;
        cell_nack[u.serving_cell] += u.harq_nack;
        cell_buffer_bits[u.serving_cell] += static_cast<double>(u.buffer_bits);
      }
    }
    for (std::size_t c = 0; c < n_cells; ++c) {
      const CellTtiStats& cs = row.cells[c];
      cell_alloc[c] += cs.prbs_allocated;
      cell_avail[c] += cs.prbs_available;
      total_energy_j += cs.energy_j;
      report.cells[c].energy_j += cs.energy_j;
      carrier_hz_seconds += cs.carrier_prbs * kPrbBandwidthHz * kTtiSeconds;
      if (cs.has_channel_stats) {
        rsrp_mean_sum[c] += cs.rsrp_mean_dbm;
        sinr_mean_sum[c] += cs.sinr_mean_db;
        rsrp_min[c] = std::min(rsrp_min[c], cs.rsrp_min_dbm);
        ++channel_rows[c];
      }
    }
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    CellTelemetry& cell = report.cells[c];
    const CellTtiStats& last = stats.back().cells[c];
    cell.cell_id = last.cell_id;
    cell.active = last.active;
    cell.subband_mask = last.subband_mask;
    cell.tx_power_dbm = last.tx_power_dbm;
    cell.throughput_bps = static_cast<double>(cell_delivered[c]) / window_s;
    cell.prb_utilization =
        cell_avail[c] > 0 ? static_cast<double>(cell_alloc[c]) / cell_avail[c] : 0.0;
    cell.harq_nack_ratio =
        cell_tx[c] > 0 ? static_cast<double>(cell_nack[c]) / cell_tx[c] : 0.0;
    cell.mean_buffer_bytes = cell_buffer_bits[c] / 8.0 / static_cast<double>(stats.size());
    if (channel_rows[c] > 0) {
      cell.rsrp_mean_dbm = rsrp_mean_sum[c] / channel_rows[c];
      cell.rsrp_min_dbm = rsrp_min[c];
      cell.sinr_mean_db = sinr_mean_sum[c] / channel_rows[c];
    }
  }

  for (double& tp : report.ue_throughput_bps) tp /= window_s;

  report.aggregate_se_bps_hz =
      carrier_hz_seconds > 0.0 ? static_cast<double>(total_delivered) / carrier_hz_seconds : 0.0;
  report.total_power_w = total_energy_j / window_s;

  const bool any_traffic =
      std::any_of(report.ue_throughput_bps.begin(), report.ue_throughput_bps.end(),
                  [](double v) { return v > 0.0; });
  report.jain_fairness = any_traffic ? jain_index(report.ue_throughput_bps) : 1.0;

  if (!delays.empty()) {
    std::sort(delays.begin(), delays.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(delays.size())));
    report.p95_delay_ms = delays[rank - 1];  // nearest-rank percentile
  }
  return report;
}

double jain_index(std::span<const double> throughputs) {
  if (throughputs.empty()) throw std::invalid_argument("jain_index needs n >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (double x : throughputs) {
    if (x < 0.0) throw std::invalid_argument("jain_index needs non-negative values");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) throw std::runtime_error("undefined fairness: all-zero throughputs");
  return sum * sum / (static_cast<double>(throughputs.size()) * sum_sq);
}

namespace {
double clamped_ratio(double value, double ref) {
  return std::clamp(value / ref, 0.0, 2.0);
}
}  // namespace

RewardSignal compute_reward(const TelemetryReport& report, const ObjectiveWeights& weights) {
  RewardSignal r;
  r.se_term = weights.w_se * clamped_ratio(report.aggregate_se_bps_hz, weights.se_ref_bps_hz);
  r.fairness_term = weights.w_fair * std::clamp(report.jain_fairness, 0.0, 2.0);
  r.latency_penalty = weights.w_lat * clamped_ratio(report.p95_delay_ms, weights.lat_ref_ms);
  r.energy_penalty = weights.w_energy * clamped_ratio(report.total_power_w, weights.p_ref_w);
  r.total = r.se_term + r.fairness_term - r.latency_penalty - r.energy_penalty;
  return r;
}

AnomalyReport AnomalyTracker::observe(double sample) {
  AnomalyReport report;
  report.metric = metric_;
  report.sample_index = count_ + 1;

  if (count_ > 0) {
    const double sigma = std::sqrt(std::max(var_, 0.0));
    if (sigma == 0.0 && sample != mean_) {
      report.z = std::numeric_limits<double>::infinity();
    } else {
      report.z = std::abs(sample - mean_) / std::max(sigma, 1e-9);
    }
    report.flagged = count_ >= warmup_ && report.z > z_threshold_;
    const double diff = sample - mean_;
    const double incr = alpha_ * diff;
    mean_ += incr;
    var_ = (1.0 - alpha_) * (var_ + diff * incr);
  } else {
    mean_ = sample;
    var_ = 0.0;
  }
  ++count_;
  return report;
}

void HoltForecaster::observe(double sample) {
  if (count_ == 0) {
    level_ = sample;
  } else if (count_ == 1) {
    trend_ = sample - level_;
    level_ = sample;
  } else {
    const double prev_level = level_;
    level_ = alpha_ * sample + (1.0 - alpha_) * (level_ + trend_);
    trend_ = beta_ * (level_ - prev_level) + (1.0 - beta_) * trend_;
  }
  ++count_;
}

double HoltForecaster::forecast(int64_t horizon) const {
  if (count_ < 2) throw std::runtime_error("insufficient history: need >= 2 samples");
  return std::max(0.0, level_ + static_cast<double>(horizon) * trend_);
}

double forecast_load(std::span<const double> history, int64_t horizon) {
  if (history.size() < 2) throw std::runtime_error("insufficient history: need >= 2 samples");
  HoltForecaster f;
  for (double x : history) f.observe(x);
  return f.forecast(horizon);
}

CellDiscreteState discretize_cell(const CellTelemetry& cell) {
  CellDiscreteState s;
  const double u = cell.prb_utilization;
  s.load_level = u >= 0.75 ? 3 : u >= 0.5 ? 2 : u >= 0.25 ? 1 : 0;
  // Interference graded by how depressed the mean SINR is; no attached UEs
  // reads as a quiet cell.
  const double sinr = cell.sinr_mean_db.value_or(30.0);
  s.interference_level = sinr >= 15.0 ? 0 : sinr >= 8.0 ? 1 : sinr >= 2.0 ? 2 : 3;
  s.mask_index = cell.subband_mask > 0 ? static_cast<int>(cell.subband_mask) - 1 : 0;
  return s;
}

DiscreteState discretize_state(const TelemetryReport& report) {
  DiscreteState state;
  state.cells.reserve(report.cells.size());
  for (const auto& cell : report.cells) state.cells.push_back(discretize_cell(cell));
  return state;
}

int discrete_state_count(int n_subbands) {
  return 4 * 4 * ((1 << n_subbands) - 1);
}

uint64_t state_key(const CellDiscreteState& s, int n_subbands) {
  const int n_masks = (1 << n_subbands) - 1;
  return (static_cast<uint64_t>(s.load_level) * 4 + s.interference_level) * n_masks +
         s.mask_index;
}

}  // namespace ranloop
