#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ranloop/agents.hpp"
#include "ranloop/observer.hpp"
#include "ranloop/supervisor.hpp"
#include "ranloop/twin.hpp"

namespace ranloop {

/// Scenario document failed to parse or validate; fatal, no partial result.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoopConfig {
  int64_t decision_interval{200};   // TTIs; the telemetry window equals it
  int checkpoint_interval{10};      // decision intervals
  int64_t total_ttis{20000};
  AgentKind agent{AgentKind::Static};
  bool shadow_enabled{true};
  bool operator==(const LoopConfig&) const = default;
};

struct UePlacement {
  int count{1};
  bool explicit_positions{false};
  std::vector<Vec2> positions;        // used when explicit
  double offered_load_bps{1e6};
  double noise_figure_db{9.0};
  bool operator==(const UePlacement&) const = default;
};

struct Scenario {
  std::string name;
  Vec2 area{1000.0, 1000.0};
  int n_subbands{4};
  int64_t packet_size_bits{12000};
  int64_t coherence_tti{1000};
  int64_t reattach_tti{1000};
  double shadowing_sigma_db{8.0};
  std::vector<CellConfig> cells;
  UePlacement ues;
  MobilitySpec mobility;
  std::vector<TrafficPhase> traffic;
  std::vector<FaultEvent> faults;
  ObjectiveWeights weights;
  SafetyEnvelope envelope;
  LoopConfig loop;

  bool operator==(const Scenario&) const = default;

  /// Twin construction inputs derived from this scenario.
  TwinInit twin_init() const;
};

/// Parses and fully validates the key/value-with-sections document. Unknown
/// keys and invariant violations are fatal; defaults are materialized so the
/// result is self-describing.
Scenario parse_scenario(const std::string& text);

Scenario load_scenario_file(const std::filesystem::path& path);

/// Canonical serialization; parse(serialize(s)) == s exactly.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace ranloop
