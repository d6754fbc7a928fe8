#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ranloop/actions.hpp"
#include "ranloop/common.hpp"
#include "ranloop/rng.hpp"

namespace ranloop {

// ---------------------------------------------------------------------------
// Configuration and state types
// ---------------------------------------------------------------------------

struct CellConfig {
  int cell_id{0};
  Vec2 position{};
  double tx_power_dbm{43.0};      // total over the carrier
  double antenna_gain_dbi{0.0};
  int n_prb{100};
  uint32_t subband_mask{0xF};     // bit s set = transmitting on sub-band s
  bool active{true};
  double idle_power_w{50.0};
  double per_prb_tx_energy_w{0.5};

  bool operator==(const CellConfig&) const = default;
};

struct Packet {
  int64_t bits{0};
  int64_t remaining_bits{0};
  int64_t arrival_tti{0};
};

struct UserEquipment {
  int ue_id{0};
  Vec2 position{};
  Vec2 waypoint{};
  double speed_mps{0.0};
  int serving_cell{-1};           // -1 = unattached (no active cell in range)
  double mean_offered_load_bps{0.0};
  double noise_figure_db{9.0};
  std::deque<Packet> buffer;
  int64_t buffer_bits{0};
  double avg_throughput_bps{0.0};  // proportional-fair EWMA history
};

/// Per-(cell, ue) channel quantities plus per-(ue, sub-band) link quality for
/// the serving cell. Non-serving SINR is not tracked.
struct ChannelState {
  int n_cells{0};
  int n_ues{0};
  int n_subbands{0};
  std::vector<double> path_loss_db;    // [cell * n_ues + ue]
  std::vector<double> shadowing_db;    // [cell * n_ues + ue]
  std::vector<double> rsrp_dbm;        // NaN = absent (cell inactive)
  std::vector<double> serving_sinr_db; // [ue * n_subbands + sb]; NaN = not transmitting
  std::vector<int> serving_cqi;        // [ue * n_subbands + sb]; 0 = absent

  double path_loss(int cell, int ue) const { return path_loss_db[cell * n_ues + ue]; }
  double shadowing(int cell, int ue) const { return shadowing_db[cell * n_ues + ue]; }
  std::optional<double> rsrp(int cell, int ue) const;
  std::optional<double> sinr(int ue, int subband) const;
  int cqi(int ue, int subband) const { return serving_cqi[ue * n_subbands + subband]; }
};

struct FaultEvent {
  int64_t tti{0};
  int cell_id{0};
  std::string field;   // one of: tx_power, active, subband_mask
  double value{0.0};
  bool operator==(const FaultEvent&) const = default;
};

struct TrafficPhase {
  int64_t start_tti{0};
  double multiplier{1.0};
  bool operator==(const TrafficPhase&) const = default;
};

struct MobilitySpec {
  bool enabled{false};
  double speed_min_mps{0.0};
  double speed_max_mps{0.0};
  bool operator==(const MobilitySpec&) const = default;
};

struct TwinParams {
  Vec2 area{1000.0, 1000.0};
  int n_subbands{4};
  int64_t packet_size_bits{12000};
  int64_t coherence_tti{1000};     // shadowing redraw interval
  int64_t reattach_tti{1000};      // attachment re-evaluation interval
  double shadowing_sigma_db{8.0};
  double pf_alpha{0.01};
  int max_harq_tx{4};
  std::vector<TrafficPhase> traffic;  // sorted by start_tti; empty = x1.0
  std::vector<FaultEvent> faults;     // sorted by tti
  bool operator==(const TwinParams&) const = default;
};

struct UeSpec {
  std::optional<Vec2> position;    // unset = draw uniformly over the area
  double mean_offered_load_bps{1e6};
  double noise_figure_db{9.0};
};

struct TwinInit {
  TwinParams params;
  MobilitySpec mobility;
  std::vector<CellConfig> cells;
  std::vector<UeSpec> ues;
};

// ---------------------------------------------------------------------------
// Per-TTI statistics
// ---------------------------------------------------------------------------

struct UeTtiStats {
  int ue_id{0};
  int serving_cell{-1};
  int64_t delivered_bits{0};
  int64_t dropped_bits{0};
  int harq_tx{0};
  int harq_nack{0};
  bool serviced{false};
  double hol_delay_ms{0.0};        // valid when serviced
  int64_t buffer_bits{0};          // occupancy at end of TTI
};

struct CellTtiStats {
  int cell_id{0};
  bool active{true};
  uint32_t subband_mask{0};
  double tx_power_dbm{0.0};
  int carrier_prbs{0};             // n_prb if active, 0 if sleeping
  int prbs_available{0};           // PRBs under the current mask (active only)
  int prbs_allocated{0};
  double energy_j{0.0};
  int attached_ues{0};
  bool has_channel_stats{false};
  double rsrp_mean_dbm{0.0};
  double rsrp_min_dbm{0.0};
  double sinr_mean_db{0.0};
  int64_t delivered_bits{0};
};

struct TtiStats {
  int64_t tti{0};
  int unattached_ues{0};
  std::vector<UeTtiStats> ues;
  std::vector<CellTtiStats> cells;
};

// ---------------------------------------------------------------------------
// Link-level operations (pure; unit-testable in isolation)
// ---------------------------------------------------------------------------

/// Urban-macro log-distance model, clamped below 35 m.
double path_loss_db(double distance_m);

/// Power of one resource element given total carrier power.
double per_re_tx_power_dbm(double tx_power_dbm, int n_prb);

/// Reference-signal received power. Absent when the cell sleeps.
std::optional<double> compute_rsrp_dbm(const CellConfig& cell, double path_loss,
                                       double shadowing);

/// RSRQ = 10 log10(n_prb * rsrp / rssi), rssi in linear mW over the measured
/// PRBs. Throws on non-positive RSSI ("degenerate power").
double compute_rsrq_db(double serving_rsrp_dbm, double rssi_mw, int n_prb);

/// Received power over one sub-band: total carrier power split evenly across
/// sub-bands, minus propagation losses.
double received_subband_power_dbm(double tx_power_dbm, double antenna_gain_dbi,
                                  int n_subbands, double path_loss, double shadowing);

/// Thermal noise over a sub-band plus receiver noise figure.
double subband_noise_dbm(double subband_bandwidth_hz, double noise_figure_db);

/// SINR from linear powers. Interference terms may be empty.
double sinr_db_from_powers(double signal_mw, std::span<const double> interference_mw,
                           double noise_mw);

struct CqiResult {
  int cqi{1};
  bool below_range{false};
};

/// Largest CQI whose threshold does not exceed the SINR. Throws on NaN.
CqiResult map_cqi(double sinr_db);

/// SINR threshold (dB) backing a CQI index in 1..15.
double cqi_threshold_db(int cqi);

/// Truncated-Shannon link abstraction: min(0.75 log2(1 + sinr), 5.55).
double spectral_efficiency_bps_hz(double sinr_db);

/// Block error rate for one transmission attempt.
double harq_bler(double sinr_db, int cqi);

struct HarqOutcome {
  bool ack{false};
  int transmissions{0};
};

/// Runs one HARQ episode: retransmissions gain +3 dB effective SINR each,
/// and the block is dropped after max_tx failures.
HarqOutcome harq_transmit(double sinr_db, int cqi, DeterministicRng& rng, int max_tx = 4);

// ---------------------------------------------------------------------------
// Twin state
// ---------------------------------------------------------------------------

/// Absolute (already resolved) configuration update for one cell.
struct ConfigUpdate {
  int cell_id{0};
  std::optional<double> tx_power_dbm;
  std::optional<uint32_t> subband_mask;
  std::optional<bool> active;
};

struct Allocation {
  int cell_id{0};
  int subband{0};
  int ue_id{0};
  int n_prb{0};
  double sinr_db{0.0};
  int cqi{0};
};

class TwinState {
 public:
  TwinState() = default;

  /// Builds the initial state: places UEs, draws shadowing, computes the
  /// channel, and attaches every UE to its strongest active cell.
  static TwinState create(const TwinInit& init, uint64_t seed);

  /// Advances n TTIs. Per TTI: traffic arrivals, mobility (and shadowing
  /// redraw on the coherence cadence), channel recompute, proportional-fair
  /// scheduling, HARQ and buffer drain, energy accounting, stats emission.
  void advance(int64_t n_tti);

  /// Deep, independent copy. The child's RNG cursor replicates the parent's,
  /// so both evolve identically under identical inputs; neither's draws
  /// affect the other.
  TwinState fork(uint32_t fork_ordinal = 0) const;

  /// Applies absolute config updates between TTIs, then recomputes the
  /// channel and re-evaluates every UE's attachment.
  void apply_config(std::span<const ConfigUpdate> updates);

  /// Proportional-fair allocation for the next TTI; pure (no state change).
  std::vector<Allocation> schedule_tti() const;

  /// Hash over all simulation-relevant state; used to prove shadow isolation.
  uint64_t state_hash() const;

  std::vector<TtiStats> drain_stats();
  void clear_stats() { stats_.clear(); }
  const std::deque<TtiStats>& stats() const { return stats_; }

  int64_t tti() const { return tti_; }
  uint64_t seed() const { return rng_.seed(); }
  const std::vector<CellConfig>& cells() const { return cells_; }
  const std::vector<UserEquipment>& ues() const { return ues_; }
  const ChannelState& channel() const { return channel_; }
  const TwinParams& params() const { return params_; }
  double traffic_multiplier(int64_t tti) const;
  int64_t fork_parent_tti() const { return fork_parent_tti_; }
  uint32_t fork_ordinal() const { return fork_ordinal_; }

  // Test hooks: mutate state directly, then refresh the derived channel.
  std::vector<CellConfig>& cells_mutable() { return cells_; }
  std::vector<UserEquipment>& ues_mutable() { return ues_; }
  void recompute_channel();

 private:
  void step_one_tti();
  void apply_fault(const FaultEvent& fault);
  void update_rsrp();
  void update_serving_links();
  void reattach_all();
  void redraw_shadowing();

  TwinParams params_;
  MobilitySpec mobility_;
  std::vector<CellConfig> cells_;
  std::vector<UserEquipment> ues_;
  ChannelState channel_;
  DeterministicRng rng_;
  int64_t tti_{0};
  std::size_t next_fault_{0};
  std::deque<TtiStats> stats_;
  int64_t fork_parent_tti_{-1};
  uint32_t fork_ordinal_{0};

  static constexpr std::size_t kStatsCapacity = 65536;
};

}  // namespace ranloop
