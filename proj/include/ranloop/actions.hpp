#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace ranloop {

/// One proposed change for one cell. Fields left unset are "no change".
/// sleep = true requests deactivation, sleep = false requests wake-up.
struct CellAction {
  int cell_id{0};
  std::optional<double> power_delta_db;
  std::optional<uint32_t> subband_mask;
  std::optional<bool> sleep;

  bool empty() const { return !power_delta_db && !subband_mask && !sleep; }
  bool operator==(const CellAction&) const = default;
};

/// At most one entry per cell per decision interval; an empty set is the
/// explicit no-op.
struct ActionSet {
  std::vector<CellAction> entries;

  bool empty() const { return entries.empty(); }
  bool operator==(const ActionSet&) const = default;
};

/// Action entry with the target cell left open; used for baseline catalogs.
struct CellActionChoice {
  std::optional<double> power_delta_db;
  std::optional<uint32_t> subband_mask;
  std::optional<bool> sleep;
  bool operator==(const CellActionChoice&) const = default;
};

}  // namespace ranloop
