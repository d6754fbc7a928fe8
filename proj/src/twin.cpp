#include "ranloop/twin.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ranloop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<double, 15> kCqiThresholdsDb = {
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7};

int popcount_mask(uint32_t mask) { return std::popcount(mask); }

}  // namespace

// ---------------------------------------------------------------------------
// Link-level operations
// ---------------------------------------------------------------------------

double path_loss_db(double distance_m) {
  const double d = std::max(distance_m, 35.0);
  return 128.1 + 37.6 * std::log10(d / 1000.0);
}

double per_re_tx_power_dbm(double tx_power_dbm, int n_prb) {
  return tx_power_dbm - linear_to_db(static_cast<double>(kResourceElementsPerPrb) * n_prb);
}

std::optional<double> compute_rsrp_dbm(const CellConfig& cell, double path_loss,
                                       double shadowing) {
  if (!cell.active) return std::nullopt;
  return per_re_tx_power_dbm(cell.tx_power_dbm, cell.n_prb) + cell.antenna_gain_dbi -
         path_loss - shadowing;
}

double compute_rsrq_db(double serving_rsrp_dbm, double rssi_mw, int n_prb) {
  if (!(rssi_mw > 0.0)) throw std::runtime_error("degenerate power: RSSI must be positive");
  const double rsrp_mw = db_to_linear(serving_rsrp_dbm);
  return linear_to_db(static_cast<double>(n_prb) * rsrp_mw / rssi_mw);
}

double received_subband_power_dbm(double tx_power_dbm, double antenna_gain_dbi,
                                  int n_subbands, double path_loss, double shadowing) {
  return tx_power_dbm - linear_to_db(static_cast<double>(n_subbands)) + antenna_gain_dbi -
         path_loss - shadowing;
}

double subband_noise_dbm(double subband_bandwidth_hz, double noise_figure_db) {
  return kThermalNoiseDbmPerHz + linear_to_db(subband_bandwidth_hz) + noise_figure_db;
}

double sinr_db_from_powers(double signal_mw, std::span<const double> interference_mw,
                           double noise_mw) {
  double denom = noise_mw;
  for (double i : interference_mw) denom += i;
  return linear_to_db(signal_mw / denom);
}

CqiResult map_cqi(double sinr_db) {
  if (std::isnan(sinr_db)) throw std::invalid_argument("invalid channel sample");
  if (sinr_db < kCqiThresholdsDb.front()) return {1, true};
  int cqi = 1;
  for (int i = 0; i < static_cast<int>(kCqiThresholdsDb.size()); ++i) {
    if (kCqiThresholdsDb[i] <= sinr_db) cqi = i + 1;
  }
  return {cqi, false};
}

double cqi_threshold_db(int cqi) {
  if (cqi < 1 || cqi > 15) throw std::out_of_range("cqi must be in 1..15");
  return kCqiThresholdsDb[cqi - 1];
}

double spectral_efficiency_bps_hz(double sinr_db) {
  const double lin = db_to_linear(sinr_db);
  return std::min(0.75 * std::log2(1.0 + lin), 5.55);
}

double harq_bler(double sinr_db, int cqi) {
  const double margin = sinr_db - cqi_threshold_db(cqi);
  return std::clamp(0.1 * std::pow(10.0, -margin / 2.0), 1e-4, 1.0);
}

HarqOutcome harq_transmit(double sinr_db, int cqi, DeterministicRng& rng, int max_tx) {
  for (int k = 1; k <= max_tx; ++k) {
    const double effective = sinr_db + 3.0 * (k - 1);  // soft combining
    const double bler = harq_bler(effective, cqi);
    if (rng.uniform(RngStream::Harq) >= bler) return {true, k};
  }
  return {false, max_tx};
}

// ---------------------------------------------------------------------------
// ChannelState accessors
// ---------------------------------------------------------------------------

std::optional<double> ChannelState::rsrp(int cell, int ue) const {
  const double v = rsrp_dbm[cell * n_ues + ue];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<double> ChannelState::sinr(int ue, int subband) const {
  const double v = serving_sinr_db[ue * n_subbands + subband];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// TwinState
// ---------------------------------------------------------------------------

TwinState TwinState::create(const TwinInit& init, uint64_t seed) {
  TwinState s;
  s.params_ = init.params;
  s.mobility_ = init.mobility;
  s.cells_ = init.cells;
  s.rng_ = DeterministicRng(seed);

  if (s.cells_.empty()) throw std::invalid_argument("twin needs at least one cell");
  if (init.ues.empty()) throw std::invalid_argument("twin needs at least one UE");
  for (const auto& c : s.cells_) {
    if (c.n_prb % s.params_.n_subbands != 0)
      throw std::invalid_argument("cell n_prb must be divisible by the sub-band count");
    if (c.active && c.subband_mask == 0)
      throw std::invalid_argument("active cell needs a non-empty sub-band mask");
  }

  std::sort(s.cells_.begin(), s.cells_.end(),
            [](const CellConfig& a, const CellConfig& b) { return a.cell_id < b.cell_id; });
  for (std::size_t i = 0; i < s.cells_.size(); ++i) {
    if (s.cells_[i].cell_id != static_cast<int>(i))
      throw std::invalid_argument("cell ids must be contiguous starting at 0");
  }

  s.ues_.reserve(init.ues.size());
  for (std::size_t i = 0; i < init.ues.size(); ++i) {
    const UeSpec& spec = init.ues[i];
    UserEquipment ue;
    ue.ue_id = static_cast<int>(i);
    if (spec.position) {
      ue.position = *spec.position;
    } else {
      ue.position.x = s.rng_.uniform(RngStream::Placement) * s.params_.area.x;
      ue.position.y = s.rng_.uniform(RngStream::Placement) * s.params_.area.y;
    }
    ue.mean_offered_load_bps = spec.mean_offered_load_bps;
    ue.noise_figure_db = spec.noise_figure_db;
    if (init.mobility.enabled) {
      ue.waypoint.x = s.rng_.uniform(RngStream::Mobility) * s.params_.area.x;
      ue.waypoint.y = s.rng_.uniform(RngStream::Mobility) * s.params_.area.y;
      ue.speed_mps = init.mobility.speed_min_mps +
                     s.rng_.uniform(RngStream::Mobility) *
                         (init.mobility.speed_max_mps - init.mobility.speed_min_mps);
    }
    s.ues_.push_back(std::move(ue));
  }

  const int n_cells = static_cast<int>(s.cells_.size());
  const int n_ues = static_cast<int>(s.ues_.size());
  s.channel_.n_cells = n_cells;
  s.channel_.n_ues = n_ues;
  s.channel_.n_subbands = s.params_.n_subbands;
  s.channel_.path_loss_db.assign(static_cast<std::size_t>(n_cells) * n_ues, 0.0);
  s.channel_.shadowing_db.assign(static_cast<std::size_t>(n_cells) * n_ues, 0.0);
  s.channel_.rsrp_dbm.assign(static_cast<std::size_t>(n_cells) * n_ues, kNaN);
  s.channel_.serving_sinr_db.assign(static_cast<std::size_t>(n_ues) * s.params_.n_subbands, kNaN);
  s.channel_.serving_cqi.assign(static_cast<std::size_t>(n_ues) * s.params_.n_subbands, 0);

  s.redraw_shadowing();
  s.update_rsrp();
  s.reattach_all();
  s.update_serving_links();
  return s;
}

void TwinState::redraw_shadowing() {
  const double sigma = params_.shadowing_sigma_db;
  for (int c = 0; c < channel_.n_cells; ++c) {
    for (int u = 0; u < channel_.n_ues; ++u) {
      channel_.shadowing_db[c * channel_.n_ues + u] =
          sigma > 0.0 ? sigma * rng_.normal(RngStream::Shadowing) : 0.0;
    }
  }
}

void TwinState::update_rsrp() {
  for (int c = 0; c < channel_.n_cells; ++c) {
    const CellConfig& cell = cells_[c];
    for (int u = 0; u < channel_.n_ues; ++u) {
      const std::size_t idx = static_cast<std::size_t>(c) * channel_.n_ues + u;
      channel_.path_loss_db[idx] = path_loss_db(distance_m(cell.position, ues_[u].position));
      const auto rsrp =
          compute_rsrp_dbm(cell, channel_.path_loss_db[idx], channel_.shadowing_db[idx]);
      channel_.rsrp_dbm[idx] = rsrp ? *rsrp : kNaN;
    }
  }
}

void TwinState::update_serving_links() {
  const int n_sb = params_.n_subbands;
  for (int u = 0; u < channel_.n_ues; ++u) {
    const UserEquipment& ue = ues_[u];
    for (int b = 0; b < n_sb; ++b) {
      const std::size_t idx = static_cast<std::size_t>(u) * n_sb + b;
      channel_.serving_sinr_db[idx] = kNaN;
      channel_.serving_cqi[idx] = 0;
    }
    if (ue.serving_cell < 0) continue;
    const CellConfig& serving = cells_[ue.serving_cell];
    if (!serving.active) continue;
    const double subband_bw_hz =
        static_cast<double>(serving.n_prb) / n_sb * kPrbBandwidthHz;
    const double noise_mw = db_to_linear(subband_noise_dbm(subband_bw_hz, ue.noise_figure_db));
    for (int b = 0; b < n_sb; ++b) {
      if (!(serving.subband_mask & (1u << b))) continue;
      const std::size_t sidx = static_cast<std::size_t>(ue.serving_cell) * channel_.n_ues + u;
      const double signal_mw = db_to_linear(received_subband_power_dbm(
          serving.tx_power_dbm, serving.antenna_gain_dbi, n_sb,
          channel_.path_loss_db[sidx], channel_.shadowing_db[sidx]));
      double interference_mw = 0.0;
      for (int c = 0; c < channel_.n_cells; ++c) {
        if (c == ue.serving_cell) continue;
        const CellConfig& other = cells_[c];
        if (!other.active || !(other.subband_mask & (1u << b))) continue;
        const std::size_t oidx = static_cast<std::size_t>(c) * channel_.n_ues + u;
        interference_mw += db_to_linear(received_subband_power_dbm(
            other.tx_power_dbm, other.antenna_gain_dbi, n_sb,
            channel_.path_loss_db[oidx], channel_.shadowing_db[oidx]));
      }
      const double sinr = linear_to_db(signal_mw / (interference_mw + noise_mw));
      const std::size_t idx = static_cast<std::size_t>(u) * n_sb + b;
      channel_.serving_sinr_db[idx] = sinr;
      channel_.serving_cqi[idx] = map_cqi(sinr).cqi;
    }
  }
}

void TwinState::reattach_all() {
  for (auto& ue : ues_) {
    int best = -1;
    double best_rsrp = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < channel_.n_cells; ++c) {
      const auto rsrp = channel_.rsrp(c, ue.ue_id);
      if (!rsrp) continue;
      if (*rsrp > best_rsrp) {  // ties keep the lowest cell id
        best_rsrp = *rsrp;
        best = c;
      }
    }
    ue.serving_cell = best;
  }
}

void TwinState::recompute_channel() {
  update_rsrp();
  reattach_all();
  update_serving_links();
}

std::vector<Allocation> TwinState::schedule_tti() const {
  std::vector<Allocation> allocations;
  const int n_sb = params_.n_subbands;
  for (int c = 0; c < channel_.n_cells; ++c) {
    const CellConfig& cell = cells_[c];
    if (!cell.active) continue;
    const int prb_per_sb = cell.n_prb / n_sb;
    for (int b = 0; b < n_sb; ++b) {
      if (!(cell.subband_mask & (1u << b))) continue;
      int best_ue = -1;
      double best_metric = -1.0;
      for (const auto& ue : ues_) {
        if (ue.serving_cell != c || ue.buffer_bits <= 0) continue;
        const auto sinr = channel_.sinr(ue.ue_id, b);
        if (!sinr) continue;
        const double rate_bps =
            spectral_efficiency_bps_hz(*sinr) * kPrbBandwidthHz * prb_per_sb;
        const double metric = rate_bps / std::max(ue.avg_throughput_bps, 1e-3);
        if (metric > best_metric) {  // ties keep the lowest ue id
          best_metric = metric;
          best_ue = ue.ue_id;
        }
      }
      if (best_ue >= 0) {
        allocations.push_back({c, b, best_ue, prb_per_sb,
                               *channel_.sinr(best_ue, b), channel_.cqi(best_ue, b)});
      }
    }
  }
  return allocations;
}

double TwinState::traffic_multiplier(int64_t tti) const {
  double mult = 1.0;
  for (const auto& phase : params_.traffic) {
    if (phase.start_tti < tti) mult = phase.multiplier;
  }
  return mult;
}

void TwinState::apply_fault(const FaultEvent& fault) {
  auto it = std::find_if(cells_.begin(), cells_.end(),
                         [&](const CellConfig& c) { return c.cell_id == fault.cell_id; });
  if (it == cells_.end()) throw std::runtime_error("fault references unknown cell");
  if (fault.field == "tx_power") {
    it->tx_power_dbm = fault.value;
  } else if (fault.field == "active") {
    it->active = fault.value != 0.0;
  } else if (fault.field == "subband_mask") {
    it->subband_mask = static_cast<uint32_t>(fault.value);
  } else {
    throw std::runtime_error("fault references unknown field: " + fault.field);
  }
  recompute_channel();
}

namespace {

/// FIFO drain; returns the bits actually removed.
int64_t drain_buffer(UserEquipment& ue, int64_t bits) {
  int64_t left = bits;
  while (left > 0 && !ue.buffer.empty()) {
    Packet& head = ue.buffer.front();
    const int64_t take = std::min(left, head.remaining_bits);
    head.remaining_bits -= take;
    ue.buffer_bits -= take;
    left -= take;
    if (head.remaining_bits == 0) ue.buffer.pop_front();
  }
  return bits - left;
}

}  // namespace

void TwinState::step_one_tti() {
  const int64_t t = tti_ + 1;
  const int n_sb = params_.n_subbands;

  // Exogenous faults scheduled strictly before this TTI take effect now.
  while (next_fault_ < params_.faults.size() && params_.faults[next_fault_].tti < t) {
    apply_fault(params_.faults[next_fault_]);
    ++next_fault_;
  }

  // (1) Poisson packet arrivals.
  const double mult = traffic_multiplier(t);
  for (auto& ue : ues_) {
    const double lambda =
        ue.mean_offered_load_bps * mult * kTtiSeconds / params_.packet_size_bits;
    const int arrivals = rng_.poisson(RngStream::Traffic, lambda);
    for (int i = 0; i < arrivals; ++i) {
      ue.buffer.push_back({params_.packet_size_bits, params_.packet_size_bits, t});
      ue.buffer_bits += params_.packet_size_bits;
    }
  }

  // (2) Random-waypoint mobility, then shadowing redraw on the coherence cadence.
  if (mobility_.enabled) {
    for (auto& ue : ues_) {
      double step = ue.speed_mps * kTtiSeconds;
      const double dx = ue.waypoint.x - ue.position.x;
      const double dy = ue.waypoint.y - ue.position.y;
      const double dist = std::hypot(dx, dy);
      if (dist <= step) {
        ue.position = ue.waypoint;
        ue.waypoint.x = rng_.uniform(RngStream::Mobility) * params_.area.x;
        ue.waypoint.y = rng_.uniform(RngStream::Mobility) * params_.area.y;
        ue.speed_mps = mobility_.speed_min_mps +
                       rng_.uniform(RngStream::Mobility) *
                           (mobility_.speed_max_mps - mobility_.speed_min_mps);
      } else {
        ue.position.x += step * dx / dist;
        ue.position.y += step * dy / dist;
      }
      ue.position.x = std::clamp(ue.position.x, 0.0, params_.area.x);
      ue.position.y = std::clamp(ue.position.y, 0.0, params_.area.y);
    }
  }
  const bool coherence_boundary =
      t > 1 && params_.coherence_tti > 0 && (t - 1) % params_.coherence_tti == 0;
  if (coherence_boundary) redraw_shadowing();

  // (3) Channel recompute; attachment re-evaluated on its own cadence.
  update_rsrp();
  if (t > 1 && params_.reattach_tti > 0 && (t - 1) % params_.reattach_tti == 0) {
    reattach_all();
  }
  update_serving_links();

  // (4) Proportional-fair scheduling.
  const std::vector<Allocation> allocations = schedule_tti();

  // (5) HARQ, buffer drain, delay stamps.
  TtiStats row;
  row.tti = t;
  row.ues.resize(ues_.size());
  row.cells.resize(cells_.size());
  for (std::size_t u = 0; u < ues_.size(); ++u) {
    row.ues[u].ue_id = ues_[u].ue_id;
    row.ues[u].serving_cell = ues_[u].serving_cell;
    if (ues_[u].serving_cell < 0) ++row.unattached_ues;
  }

  std::vector<int> prbs_used(cells_.size(), 0);
  for (const auto& alloc : allocations) {
    UserEquipment& ue = ues_[alloc.ue_id];
    UeTtiStats& ustat = row.ues[alloc.ue_id];
    const double se = spectral_efficiency_bps_hz(alloc.sinr_db);
    const auto capacity_bits =
        static_cast<int64_t>(se * kPrbBandwidthHz * kTtiSeconds * alloc.n_prb);
    const int64_t tb_bits = std::min<int64_t>(capacity_bits, ue.buffer_bits);
    if (tb_bits <= 0) continue;

    prbs_used[alloc.cell_id] += alloc.n_prb;
    const HarqOutcome outcome =
        harq_transmit(alloc.sinr_db, alloc.cqi, rng_, params_.max_harq_tx);
    ustat.harq_tx += outcome.transmissions;
    if (outcome.ack) {
      if (!ustat.serviced) {
        ustat.serviced = true;
        ustat.hol_delay_ms = static_cast<double>(t - ue.buffer.front().arrival_tti);
      }
      ustat.harq_nack += outcome.transmissions - 1;
      ustat.delivered_bits += drain_buffer(ue, tb_bits);
    } else {
      ustat.harq_nack += outcome.transmissions;
      ustat.dropped_bits += drain_buffer(ue, tb_bits);
    }
  }

  // PF history update, once per UE per TTI.
  for (std::size_t u = 0; u < ues_.size(); ++u) {
    const double inst_bps = static_cast<double>(row.ues[u].delivered_bits) / kTtiSeconds;
    ues_[u].avg_throughput_bps =
        (1.0 - params_.pf_alpha) * ues_[u].avg_throughput_bps + params_.pf_alpha * inst_bps;
    row.ues[u].buffer_bits = ues_[u].buffer_bits;
  }

  // (6) Energy accounting and per-cell channel statistics.
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const CellConfig& cell = cells_[c];
    CellTtiStats& cstat = row.cells[c];
    cstat.cell_id = cell.cell_id;
    cstat.active = cell.active;
    cstat.subband_mask = cell.subband_mask;
    cstat.tx_power_dbm = cell.tx_power_dbm;
    if (cell.active) {
      cstat.carrier_prbs = cell.n_prb;
      cstat.prbs_available = cell.n_prb / n_sb * popcount_mask(cell.subband_mask);
      cstat.prbs_allocated = prbs_used[c];
      cstat.energy_j = (cell.idle_power_w + cell.per_prb_tx_energy_w * prbs_used[c]) * kTtiSeconds;
    } else {
      cstat.energy_j = 0.1 * cell.idle_power_w * kTtiSeconds;
    }

    double rsrp_sum = 0.0;
    double rsrp_min = std::numeric_limits<double>::infinity();
    double sinr_sum = 0.0;
    int rsrp_n = 0;
    int sinr_n = 0;
    for (const auto& ue : ues_) {
      if (ue.serving_cell != static_cast<int>(c)) continue;
      ++cstat.attached_ues;
      cstat.delivered_bits += row.ues[ue.ue_id].delivered_bits;
      if (const auto rsrp = channel_.rsrp(static_cast<int>(c), ue.ue_id)) {
        rsrp_sum += *rsrp;
        rsrp_min = std::min(rsrp_min, *rsrp);
        ++rsrp_n;
      }
      for (int b = 0; b < n_sb; ++b) {
        if (const auto sinr = channel_.sinr(ue.ue_id, b)) {
          sinr_sum += *sinr;
          ++sinr_n;
        }
      }
    }
    if (rsrp_n > 0) {
      cstat.has_channel_stats = true;
      cstat.rsrp_mean_dbm = rsrp_sum / rsrp_n;
      cstat.rsrp_min_dbm = rsrp_min;
      cstat.sinr_mean_db = sinr_n > 0 ? sinr_sum / sinr_n : 0.0;
    }
  }

  // (7) Stats emission.
  stats_.push_back(std::move(row));
  if (stats_.size() > kStatsCapacity) stats_.pop_front();
  tti_ = t;
}

void TwinState::advance(int64_t n_tti) {
  if (n_tti < 1) throw std::invalid_argument("advance needs n_tti >= 1");
  for (int64_t i = 0; i < n_tti; ++i) step_one_tti();
}

TwinState TwinState::fork(uint32_t fork_ordinal) const {
  TwinState child = *this;
  child.fork_parent_tti_ = tti_;
  child.fork_ordinal_ = fork_ordinal;
  return child;
}

void TwinState::apply_config(std::span<const ConfigUpdate> updates) {
  for (const auto& update : updates) {
    auto it = std::find_if(cells_.begin(), cells_.end(),
                           [&](const CellConfig& c) { return c.cell_id == update.cell_id; });
    if (it == cells_.end()) throw std::invalid_argument("unknown cell");
    if (update.tx_power_dbm) it->tx_power_dbm = *update.tx_power_dbm;
    if (update.subband_mask) it->subband_mask = *update.subband_mask;
    if (update.active) it->active = *update.active;
    if (it->active && it->subband_mask == 0)
      throw std::invalid_argument("active cell needs a non-empty sub-band mask");
  }
  recompute_channel();
}

std::vector<TtiStats> TwinState::drain_stats() {
  std::vector<TtiStats> out(stats_.begin(), stats_.end());
  stats_.clear();
  return out;
}

namespace {

struct Fnv1a {
  uint64_t h = 0xCBF29CE484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001B3ULL;
    }
  }
  void u64(uint64_t v) { bytes(&v, sizeof v); }
  void i64(int64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void i32(int v) { bytes(&v, sizeof v); }
};

}  // namespace

uint64_t TwinState::state_hash() const {
  Fnv1a h;
  h.i64(tti_);
  h.u64(rng_.seed());
  for (std::size_t s = 0; s < kRngStreamCount; ++s) {
    h.u64(rng_.draw_count(static_cast<RngStream>(s)));
  }
  for (const auto& c : cells_) {
    h.i32(c.cell_id);
    h.f64(c.position.x);
    h.f64(c.position.y);
    h.f64(c.tx_power_dbm);
    h.f64(c.antenna_gain_dbi);
    h.i32(c.n_prb);
    h.u64(c.subband_mask);
    h.i32(c.active ? 1 : 0);
    h.f64(c.idle_power_w);
    h.f64(c.per_prb_tx_energy_w);
  }
  for (const auto& u : ues_) {
    h.i32(u.ue_id);
    h.f64(u.position.x);
    h.f64(u.position.y);
    h.f64(u.waypoint.x);
    h.f64(u.waypoint.y);
    h.f64(u.speed_mps);
    h.i32(u.serving_cell);
    h.i64(u.buffer_bits);
    h.u64(u.buffer.size());
    if (!u.buffer.empty()) {
      h.i64(u.buffer.front().remaining_bits);
      h.i64(u.buffer.front().arrival_tti);
      h.i64(u.buffer.back().arrival_tti);
    }
    h.f64(u.avg_throughput_bps);
  }
  for (double v : channel_.shadowing_db) h.f64(v);
  for (double v : channel_.serving_sinr_db) h.f64(v);
  h.u64(next_fault_);
  return h.h;
}

}  // namespace ranloop
