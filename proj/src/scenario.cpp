#include "ranloop/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ranloop {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

double parse_double(const std::string& value, const std::string& path) {
  double out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last)
    throw ScenarioError(path + ": not a number: '" + value + "'");
  return out;
}

int64_t parse_int(const std::string& value, const std::string& path) {
  int64_t out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last)
    throw ScenarioError(path + ": not an integer: '" + value + "'");
  return out;
}

bool parse_bool(const std::string& value, const std::string& path) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ScenarioError(path + ": not a boolean: '" + value + "'");
}

Vec2 parse_vec2(const std::string& value, const std::string& path) {
  const auto parts = split_ws(value);
  if (parts.size() != 2) throw ScenarioError(path + ": expected two numbers, got '" + value + "'");
  return {parse_double(parts[0], path), parse_double(parts[1], path)};
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Section {
  std::string name;
  int line{0};
  std::vector<std::pair<std::string, std::string>> entries;  // key -> raw value
  std::set<std::string> consumed;
};

class SectionReader {
 public:
  SectionReader(Section& section, std::string path) : section_(section), path_(std::move(path)) {}

  std::optional<std::string> raw(const std::string& key) {
    std::optional<std::string> found;
    for (const auto& [k, v] : section_.entries) {
      if (k == key) found = v;  // last occurrence wins for scalar keys
    }
    if (found) section_.consumed.insert(key);
    return found;
  }

  std::vector<std::string> raw_all(const std::string& key) {
    std::vector<std::string> out;
    for (const auto& [k, v] : section_.entries) {
      if (k == key) out.push_back(v);
    }
    if (!out.empty()) section_.consumed.insert(key);
    return out;
  }

  double number(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? parse_double(*v, path_ + "." + key) : fallback;
  }
  int64_t integer(const std::string& key, int64_t fallback) {
    const auto v = raw(key);
    return v ? parse_int(*v, path_ + "." + key) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    const auto v = raw(key);
    return v ? parse_bool(*v, path_ + "." + key) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const auto v = raw(key);
    return v ? *v : fallback;
  }
  Vec2 vec2(const std::string& key, Vec2 fallback) {
    const auto v = raw(key);
    return v ? parse_vec2(*v, path_ + "." + key) : fallback;
  }

  double require_number(const std::string& key) {
    const auto v = raw(key);
    if (!v) throw ScenarioError(path_ + "." + key + ": required key missing");
    return parse_double(*v, path_ + "." + key);
  }
  int64_t require_integer(const std::string& key) {
    const auto v = raw(key);
    if (!v) throw ScenarioError(path_ + "." + key + ": required key missing");
    return parse_int(*v, path_ + "." + key);
  }
  Vec2 require_vec2(const std::string& key) {
    const auto v = raw(key);
    if (!v) throw ScenarioError(path_ + "." + key + ": required key missing");
    return parse_vec2(*v, path_ + "." + key);
  }
  std::string require_text(const std::string& key) {
    const auto v = raw(key);
    if (!v) throw ScenarioError(path_ + "." + key + ": required key missing");
    return *v;
  }

  const std::string& path() const { return path_; }

 private:
  Section& section_;
  std::string path_;
};

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ScenarioError("line " + std::to_string(line_no) + ": malformed section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("line " + std::to_string(line_no) + ": expected 'key = value'");
    if (sections.empty())
      throw ScenarioError("line " + std::to_string(line_no) + ": key outside any section");
    sections.back().entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return sections;
}

void validate(const Scenario& s) {
  if (s.name.empty()) throw ScenarioError("scenario.name: must be non-empty");
  if (!(s.area.x > 0.0) || !(s.area.y > 0.0))
    throw ScenarioError("scenario.area: both extents must be positive");
  if (s.n_subbands < 1 || s.n_subbands > 8)
    throw ScenarioError("scenario.subbands: must be in 1..8");
  if (s.packet_size_bits < 1) throw ScenarioError("scenario.packet_size_bits: must be >= 1");
  if (s.coherence_tti < 1) throw ScenarioError("scenario.coherence_tti: must be >= 1");
  if (s.reattach_tti < 1) throw ScenarioError("scenario.reattach_tti: must be >= 1");
  if (s.shadowing_sigma_db < 0.0)
    throw ScenarioError("scenario.shadowing_sigma_db: must be >= 0");

  const SafetyEnvelope& env = s.envelope;
  if (env.power_min_dbm > env.power_max_dbm)
    throw ScenarioError("envelope.power_min: exceeds envelope.power_max");
  if (env.max_power_step_db <= 0.0) throw ScenarioError("envelope.max_power_step: must be > 0");
  if (!(env.degradation_fraction > 0.0 && env.degradation_fraction < 1.0))
    throw ScenarioError("envelope.degradation_fraction: must be in (0,1)");
  if (env.degradation_windows < 1)
    throw ScenarioError("envelope.degradation_windows: must be >= 1");
  if (env.shadow_horizon_tti < 1) throw ScenarioError("envelope.shadow_horizon: must be >= 1");
  if (env.shadow_tolerance < 0.0) throw ScenarioError("envelope.shadow_tolerance: must be >= 0");
  if (env.mad_ms <= 0.0) throw ScenarioError("envelope.mad: must be > 0");
  if (env.min_active_cells < 0) throw ScenarioError("envelope.min_active_cells: must be >= 0");

  if (s.cells.empty()) throw ScenarioError("cell: at least one cell is required");
  static const std::set<int> kPrbChoices = {6, 15, 25, 50, 75, 100};
  std::set<int> ids;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const CellConfig& c = s.cells[i];
    const std::string path = "cell[" + std::to_string(i) + "]";
    if (!ids.insert(c.cell_id).second)
      throw ScenarioError(path + ".id: duplicate cell id " + std::to_string(c.cell_id));
    if (c.position.x < 0 || c.position.x > s.area.x || c.position.y < 0 || c.position.y > s.area.y)
      throw ScenarioError(path + ".position: outside the scenario area");
    if (c.tx_power_dbm < env.power_min_dbm || c.tx_power_dbm > env.power_max_dbm)
      throw ScenarioError(path + ".tx_power: " + format_double(c.tx_power_dbm) +
                          " outside envelope [" + format_double(env.power_min_dbm) + ", " +
                          format_double(env.power_max_dbm) + "]");
    if (!kPrbChoices.count(c.n_prb))
      throw ScenarioError(path + ".n_prb: must be one of 6, 15, 25, 50, 75, 100");
    if (c.n_prb % s.n_subbands != 0)
      throw ScenarioError(path + ".n_prb: not divisible by subbands=" +
                          std::to_string(s.n_subbands));
    if (c.n_prb != s.cells.front().n_prb)
      throw ScenarioError(path + ".n_prb: all cells must share one carrier width");
    const uint32_t full = (1u << s.n_subbands) - 1;
    if (c.subband_mask < 1 || c.subband_mask > full)
      throw ScenarioError(path + ".subband_mask: must be in 1.." + std::to_string(full));
    if (c.idle_power_w < 0.0) throw ScenarioError(path + ".idle_power: must be >= 0");
    if (c.per_prb_tx_energy_w < 0.0)
      throw ScenarioError(path + ".per_prb_tx_energy: must be >= 0");
  }
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    if (s.cells[i].cell_id != static_cast<int>(i))
      throw ScenarioError("cell[" + std::to_string(i) + "].id: ids must be contiguous from 0");
  }

  if (s.ues.count < 1) throw ScenarioError("ues.count: at least one UE is required");
  if (s.ues.explicit_positions &&
      static_cast<int>(s.ues.positions.size()) != s.ues.count)
    throw ScenarioError("ues.position: explicit placement needs exactly 'count' positions");
  for (std::size_t i = 0; i < s.ues.positions.size(); ++i) {
    const Vec2& p = s.ues.positions[i];
    if (p.x < 0 || p.x > s.area.x || p.y < 0 || p.y > s.area.y)
      throw ScenarioError("ues.position[" + std::to_string(i) + "]: outside the scenario area");
  }
  if (s.ues.offered_load_bps < 0.0) throw ScenarioError("ues.offered_load: must be >= 0");
  if (s.mobility.enabled) {
    if (s.mobility.speed_min_mps < 0.0 || s.mobility.speed_max_mps < s.mobility.speed_min_mps)
      throw ScenarioError("ues.mobility: need 0 <= vmin <= vmax");
  }

  int64_t prev_start = -1;
  for (std::size_t i = 0; i < s.traffic.size(); ++i) {
    const TrafficPhase& phase = s.traffic[i];
    const std::string path = "traffic.phase[" + std::to_string(i) + "]";
    if (phase.start_tti < 0) throw ScenarioError(path + ": start tti must be >= 0");
    if (phase.start_tti <= prev_start)
      throw ScenarioError(path + ": phases must be strictly increasing and non-overlapping");
    if (phase.multiplier < 0.0) throw ScenarioError(path + ": multiplier must be >= 0");
    prev_start = phase.start_tti;
  }

  for (std::size_t i = 0; i < s.faults.size(); ++i) {
    const FaultEvent& f = s.faults[i];
    const std::string path = "fault[" + std::to_string(i) + "]";
    if (f.tti < 0) throw ScenarioError(path + ".tti: must be >= 0");
    if (!ids.count(f.cell_id)) throw ScenarioError(path + ".cell: unknown cell id");
    if (f.field != "tx_power" && f.field != "active" && f.field != "subband_mask")
      throw ScenarioError(path + ".field: must be tx_power, active, or subband_mask");
    if (f.field == "subband_mask") {
      const auto mask = static_cast<int64_t>(f.value);
      if (mask < 1 || mask > (1 << s.n_subbands) - 1)
        throw ScenarioError(path + ".value: sub-band mask out of range");
    }
    if (f.field == "active" && f.value != 0.0 && f.value != 1.0)
      throw ScenarioError(path + ".value: active must be 0 or 1");
  }

  const ObjectiveWeights& w = s.weights;
  if (w.w_se < 0 || w.w_fair < 0 || w.w_lat < 0 || w.w_energy < 0)
    throw ScenarioError("weights: all weights must be >= 0");
  if (!(w.se_ref_bps_hz > 0) || !(w.lat_ref_ms > 0) || !(w.p_ref_w > 0))
    throw ScenarioError("weights: all normalizers must be > 0");

  if (s.loop.decision_interval < 1) throw ScenarioError("loop.decision_interval: must be >= 1");
  if (s.loop.total_ttis < s.loop.decision_interval)
    throw ScenarioError("loop.total_ttis: must be >= decision_interval");
  if (s.loop.checkpoint_interval < 1) throw ScenarioError("loop.checkpoint_interval: must be >= 1");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  std::vector<Section> sections = tokenize(text);

  static const std::set<std::string> kKnownSections = {
      "scenario", "cell", "ues", "traffic", "fault", "weights", "envelope", "loop"};
  static const std::map<std::string, std::set<std::string>> kKnownKeys = {
      {"scenario",
       {"name", "area", "subbands", "packet_size_bits", "coherence_tti", "reattach_tti",
        "shadowing_sigma_db"}},
      {"cell",
       {"id", "position", "tx_power", "antenna_gain", "n_prb", "subband_mask", "active",
        "idle_power", "per_prb_tx_energy"}},
      {"ues", {"count", "placement", "position", "offered_load", "noise_figure", "mobility"}},
      {"traffic", {"phase"}},
      {"fault", {"tti", "cell", "field", "value"}},
      {"weights", {"w_se", "w_fair", "w_lat", "w_energy", "se_ref", "lat_ref", "p_ref"}},
      {"envelope",
       {"power_min", "power_max", "max_power_step", "min_coverage_rsrp", "mad",
        "min_active_cells", "degradation_fraction", "degradation_windows", "shadow_horizon",
        "shadow_tolerance"}},
      {"loop",
       {"decision_interval", "checkpoint_interval", "total_ttis", "agent", "shadow"}},
  };

  std::vector<std::string> unknown;
  for (const auto& section : sections) {
    if (!kKnownSections.count(section.name)) {
      unknown.push_back("[" + section.name + "] (line " + std::to_string(section.line) + ")");
      continue;
    }
    const auto& keys = kKnownKeys.at(section.name);
    for (const auto& [k, v] : section.entries) {
      if (!keys.count(k)) unknown.push_back("[" + section.name + "]." + k);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ScenarioError(msg);
  }

  Scenario s;
  int cell_index = 0;
  int fault_index = 0;
  bool have_scenario = false, have_ues = false;
  for (auto& section : sections) {
    if (section.name == "scenario") {
      have_scenario = true;
      SectionReader r(section, "scenario");
      s.name = r.require_text("name");
      s.area = r.require_vec2("area");
      s.n_subbands = static_cast<int>(r.integer("subbands", 4));
      s.packet_size_bits = r.integer("packet_size_bits", 12000);
      s.coherence_tti = r.integer("coherence_tti", 1000);
      s.reattach_tti = r.integer("reattach_tti", 1000);
      s.shadowing_sigma_db = r.number("shadowing_sigma_db", 8.0);
    } else if (section.name == "cell") {
      SectionReader r(section, "cell[" + std::to_string(cell_index) + "]");
      CellConfig c;
      c.cell_id = static_cast<int>(r.require_integer("id"));
      c.position = r.require_vec2("position");
      c.tx_power_dbm = r.number("tx_power", 43.0);
      c.antenna_gain_dbi = r.number("antenna_gain", 0.0);
      c.n_prb = static_cast<int>(r.integer("n_prb", 100));
      c.subband_mask = static_cast<uint32_t>(r.integer("subband_mask", (1 << s.n_subbands) - 1));
      c.active = r.boolean("active", true);
      c.idle_power_w = r.number("idle_power", 50.0);
      c.per_prb_tx_energy_w = r.number("per_prb_tx_energy", 0.5);
      s.cells.push_back(c);
      ++cell_index;
    } else if (section.name == "ues") {
      have_ues = true;
      SectionReader r(section, "ues");
      const std::string placement = r.text("placement", "uniform");
      if (placement != "uniform" && placement != "explicit")
        throw ScenarioError("ues.placement: must be 'uniform' or 'explicit'");
      s.ues.explicit_positions = placement == "explicit";
      for (const auto& pos : r.raw_all("position")) {
        s.ues.positions.push_back(parse_vec2(pos, "ues.position"));
      }
      s.ues.count = static_cast<int>(
          r.integer("count", s.ues.explicit_positions
                                 ? static_cast<int64_t>(s.ues.positions.size())
                                 : 1));
      s.ues.offered_load_bps = r.number("offered_load", 1e6);
      s.ues.noise_figure_db = r.number("noise_figure", 9.0);
      const std::string mobility = r.text("mobility", "none");
      if (mobility == "none") {
        s.mobility = {};
      } else {
        const auto parts = split_ws(mobility);
        if (parts.size() != 3 || parts[0] != "random_waypoint")
          throw ScenarioError("ues.mobility: expected 'none' or 'random_waypoint <vmin> <vmax>'");
        s.mobility.enabled = true;
        s.mobility.speed_min_mps = parse_double(parts[1], "ues.mobility");
        s.mobility.speed_max_mps = parse_double(parts[2], "ues.mobility");
      }
      if (!s.ues.explicit_positions && !s.ues.positions.empty())
        throw ScenarioError("ues.position: only valid with placement = explicit");
    } else if (section.name == "traffic") {
      SectionReader r(section, "traffic");
      for (const auto& phase : r.raw_all("phase")) {
        const auto parts = split_ws(phase);
        if (parts.size() != 2)
          throw ScenarioError("traffic.phase: expected '<start_tti> <multiplier>'");
        s.traffic.push_back({parse_int(parts[0], "traffic.phase"),
                             parse_double(parts[1], "traffic.phase")});
      }
    } else if (section.name == "fault") {
      SectionReader r(section, "fault[" + std::to_string(fault_index) + "]");
      FaultEvent f;
      f.tti = r.require_integer("tti");
      f.cell_id = static_cast<int>(r.require_integer("cell"));
      f.field = r.require_text("field");
      f.value = r.require_number("value");
      s.faults.push_back(f);
      ++fault_index;
    } else if (section.name == "weights") {
      SectionReader r(section, "weights");
      s.weights.w_se = r.number("w_se", 1.0);
      s.weights.w_fair = r.number("w_fair", 0.5);
      s.weights.w_lat = r.number("w_lat", 0.5);
      s.weights.w_energy = r.number("w_energy", 0.25);
      s.weights.se_ref_bps_hz = r.number("se_ref", 2.0);
      s.weights.lat_ref_ms = r.number("lat_ref", 20.0);
      s.weights.p_ref_w = r.number("p_ref", 500.0);
    } else if (section.name == "envelope") {
      SectionReader r(section, "envelope");
      s.envelope.power_min_dbm = r.number("power_min", 0.0);
      s.envelope.power_max_dbm = r.number("power_max", 46.0);
      s.envelope.max_power_step_db = r.number("max_power_step", 3.0);
      s.envelope.min_coverage_rsrp_dbm = r.number("min_coverage_rsrp", -115.0);
      s.envelope.mad_ms = r.number("mad", 50.0);
      s.envelope.min_active_cells = static_cast<int>(r.integer("min_active_cells", 1));
      s.envelope.degradation_fraction = r.number("degradation_fraction", 0.15);
      s.envelope.degradation_windows = static_cast<int>(r.integer("degradation_windows", 5));
      s.envelope.shadow_horizon_tti = r.integer("shadow_horizon", 500);
      s.envelope.shadow_tolerance = r.number("shadow_tolerance", 0.05);
    } else if (section.name == "loop") {
      SectionReader r(section, "loop");
      s.loop.decision_interval = r.integer("decision_interval", 200);
      s.loop.checkpoint_interval = static_cast<int>(r.integer("checkpoint_interval", 10));
      s.loop.total_ttis = r.integer("total_ttis", 20000);
      s.loop.agent = agent_kind_from_string(r.text("agent", "static"));
      s.loop.shadow_enabled = r.boolean("shadow", true);
    }
  }

  if (!have_scenario) throw ScenarioError("missing [scenario] section");
  if (!have_ues) throw ScenarioError("missing [ues] section");

  std::sort(s.traffic.begin(), s.traffic.end(),
            [](const TrafficPhase& a, const TrafficPhase& b) { return a.start_tti < b.start_tti; });
  std::sort(s.faults.begin(), s.faults.end(),
            [](const FaultEvent& a, const FaultEvent& b) { return a.tti < b.tti; });
  std::sort(s.cells.begin(), s.cells.end(),
            [](const CellConfig& a, const CellConfig& b) { return a.cell_id < b.cell_id; });

  validate(s);
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "[scenario]\n";
  out << "name = " << s.name << "\n";
  out << "area = " << format_double(s.area.x) << " " << format_double(s.area.y) << "\n";
  out << "subbands = " << s.n_subbands << "\n";
  out << "packet_size_bits = " << s.packet_size_bits << "\n";
  out << "coherence_tti = " << s.coherence_tti << "\n";
  out << "reattach_tti = " << s.reattach_tti << "\n";
  out << "shadowing_sigma_db = " << format_double(s.shadowing_sigma_db) << "\n";

  for (const auto& c : s.cells) {
    out << "\n[cell]\n";
    out << "id = " << c.cell_id << "\n";
    out << "position = " << format_double(c.position.x) << " " << format_double(c.position.y)
        << "\n";
    out << "tx_power = " << format_double(c.tx_power_dbm) << "\n";
    out << "antenna_gain = " << format_double(c.antenna_gain_dbi) << "\n";
    out << "n_prb = " << c.n_prb << "\n";
    out << "subband_mask = " << c.subband_mask << "\n";
    out << "active = " << (c.active ? "true" : "false") << "\n";
    out << "idle_power = " << format_double(c.idle_power_w) << "\n";
    out << "per_prb_tx_energy = " << format_double(c.per_prb_tx_energy_w) << "\n";
  }

  out << "\n[ues]\n";
  out << "count = " << s.ues.count << "\n";
  out << "placement = " << (s.ues.explicit_positions ? "explicit" : "uniform") << "\n";
  for (const auto& p : s.ues.positions) {
    out << "position = " << format_double(p.x) << " " << format_double(p.y) << "\n";
  }
  out << "offered_load = " << format_double(s.ues.offered_load_bps) << "\n";
  out << "noise_figure = " << format_double(s.ues.noise_figure_db) << "\n";
  if (s.mobility.enabled) {
    out << "mobility = random_waypoint " << format_double(s.mobility.speed_min_mps) << " "
        << format_double(s.mobility.speed_max_mps) << "\n";
  } else {
    out << "mobility = none\n";
  }

  if (!s.traffic.empty()) {
    out << "\n[traffic]\n";
    for (const auto& phase : s.traffic) {
      out << "phase = " << phase.start_tti << " " << format_double(phase.multiplier) << "\n";
    }
  }

  for (const auto& f : s.faults) {
    out << "\n[fault]\n";
    out << "tti = " << f.tti << "\n";
    out << "cell = " << f.cell_id << "\n";
    out << "field = " << f.field << "\n";
    out << "value = " << format_double(f.value) << "\n";
  }

  out << "\n[weights]\n";
  out << "w_se = " << format_double(s.weights.w_se) << "\n";
  out << "w_fair = " << format_double(s.weights.w_fair) << "\n";
  out << "w_lat = " << format_double(s.weights.w_lat) << "\n";
  out << "w_energy = " << format_double(s.weights.w_energy) << "\n";
  out << "se_ref = " << format_double(s.weights.se_ref_bps_hz) << "\n";
  out << "lat_ref = " << format_double(s.weights.lat_ref_ms) << "\n";
  out << "p_ref = " << format_double(s.weights.p_ref_w) << "\n";

  out << "\n[envelope]\n";
  out << "power_min = " << format_double(s.envelope.power_min_dbm) << "\n";
  out << "power_max = " << format_double(s.envelope.power_max_dbm) << "\n";
  out << "max_power_step = " << format_double(s.envelope.max_power_step_db) << "\n";
  out << "min_coverage_rsrp = " << format_double(s.envelope.min_coverage_rsrp_dbm) << "\n";
  out << "mad = " << format_double(s.envelope.mad_ms) << "\n";
  out << "min_active_cells = " << s.envelope.min_active_cells << "\n";
  out << "degradation_fraction = " << format_double(s.envelope.degradation_fraction) << "\n";
  out << "degradation_windows = " << s.envelope.degradation_windows << "\n";
  out << "shadow_horizon = " << s.envelope.shadow_horizon_tti << "\n";
  out << "shadow_tolerance = " << format_double(s.envelope.shadow_tolerance) << "\n";

  out << "\n[loop]\n";
  out << "decision_interval = " << s.loop.decision_interval << "\n";
  out << "checkpoint_interval = " << s.loop.checkpoint_interval << "\n";
  out << "total_ttis = " << s.loop.total_ttis << "\n";
  out << "agent = " << to_string(s.loop.agent) << "\n";
  out << "shadow = " << (s.loop.shadow_enabled ? "true" : "false") << "\n";
  return out.str();
}

TwinInit Scenario::twin_init() const {
  TwinInit init;
  init.params.area = area;
  init.params.n_subbands = n_subbands;
  init.params.packet_size_bits = packet_size_bits;
  init.params.coherence_tti = coherence_tti;
  init.params.reattach_tti = reattach_tti;
  init.params.shadowing_sigma_db = shadowing_sigma_db;
  init.params.traffic = traffic;
  init.params.faults = faults;
  init.mobility = mobility;
  init.cells = cells;
  init.ues.reserve(ues.count);
  for (int i = 0; i < ues.count; ++i) {
    UeSpec spec;
    if (ues.explicit_positions) spec.position = ues.positions[i];
    spec.mean_offered_load_bps = ues.offered_load_bps;
    spec.noise_figure_db = ues.noise_figure_db;
    init.ues.push_back(spec);
  }
  return init;
}

}  // namespace ranloop
