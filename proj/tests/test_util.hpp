#pragma once

#include <vector>

#include "ranloop/twin.hpp"

namespace ranloop::testutil {

inline CellConfig make_cell(int id, double x, double y, double tx_dbm = 43.0,
                            int n_prb = 100, uint32_t mask = 0xF) {
  CellConfig c;
  c.cell_id = id;
  c.position = {x, y};
  c.tx_power_dbm = tx_dbm;
  c.n_prb = n_prb;
  c.subband_mask = mask;
  return c;
}

inline UeSpec make_ue(double x, double y, double load_bps = 1e6) {
  UeSpec u;
  u.position = Vec2{x, y};
  u.mean_offered_load_bps = load_bps;
  return u;
}

/// One cell, one close UE, no shadowing: a clean high-SINR link.
inline TwinInit single_link_init(double load_bps = 1e6) {
  TwinInit init;
  init.params.area = {2000.0, 2000.0};
  init.params.shadowing_sigma_db = 0.0;
  init.cells = {make_cell(0, 1000.0, 1000.0)};
  init.ues = {make_ue(1100.0, 1000.0, load_bps)};
  return init;
}

inline bool same_ue_stats(const UeTtiStats& a, const UeTtiStats& b) {
  return a.ue_id == b.ue_id && a.serving_cell == b.serving_cell &&
         a.delivered_bits == b.delivered_bits && a.dropped_bits == b.dropped_bits &&
         a.harq_tx == b.harq_tx && a.harq_nack == b.harq_nack && a.serviced == b.serviced &&
         a.hol_delay_ms == b.hol_delay_ms && a.buffer_bits == b.buffer_bits;
}

inline bool same_cell_stats(const CellTtiStats& a, const CellTtiStats& b) {
  return a.cell_id == b.cell_id && a.active == b.active && a.subband_mask == b.subband_mask &&
         a.tx_power_dbm == b.tx_power_dbm && a.carrier_prbs == b.carrier_prbs &&
         a.prbs_available == b.prbs_available && a.prbs_allocated == b.prbs_allocated &&
         a.energy_j == b.energy_j && a.attached_ues == b.attached_ues &&
         a.has_channel_stats == b.has_channel_stats && a.rsrp_mean_dbm == b.rsrp_mean_dbm &&
         a.rsrp_min_dbm == b.rsrp_min_dbm && a.sinr_mean_db == b.sinr_mean_db &&
         a.delivered_bits == b.delivered_bits;
}

inline bool same_stats(const std::vector<TtiStats>& a, const std::vector<TtiStats>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].tti != b[i].tti || a[i].unattached_ues != b[i].unattached_ues) return false;
    if (a[i].ues.size() != b[i].ues.size() || a[i].cells.size() != b[i].cells.size())
      return false;
    for (std::size_t u = 0; u < a[i].ues.size(); ++u) {
      if (!same_ue_stats(a[i].ues[u], b[i].ues[u])) return false;
    }
    for (std::size_t c = 0; c < a[i].cells.size(); ++c) {
      if (!same_cell_stats(a[i].cells[c], b[i].cells[c])) return false;
    }
  }
  return true;
}

}  // namespace ranloop::testutil
