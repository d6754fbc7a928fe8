#include "ranloop/records.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ranloop {

std::string format_double_9sig(double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, ptr);
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char hex[8];
          std::snprintf(hex, sizeof hex, "\\u%04x", c);
          out += hex;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

}  // namespace

void write_json(std::string& out, const JsonValue& value) {
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::nullptr_t>) {
          out += "null";
        } else if constexpr (std::is_same_v<T, bool>) {
          out += v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, int64_t> || std::is_same_v<T, uint64_t>) {
          out += std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          if (std::isfinite(v)) {
            out += format_double_9sig(v);
          } else {
            out += "null";  // JSON has no inf/nan
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          write_escaped(out, v);
        } else if constexpr (std::is_same_v<T, JsonArray>) {
          out.push_back('[');
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) out.push_back(',');
            write_json(out, v[i]);
          }
          out.push_back(']');
        } else if constexpr (std::is_same_v<T, JsonObject>) {
          out.push_back('{');
          bool first = true;
          for (const auto& [key, item] : v) {
            if (!first) out.push_back(',');
            first = false;
            write_escaped(out, key);
            out.push_back(':');
            write_json(out, item);
          }
          out.push_back('}');
        }
      },
      value.value);
}

std::string to_json_line(const JsonObject& record) {
  std::string out;
  write_json(out, JsonValue(record));
  out.push_back('\n');
  return out;
}

namespace {

JsonValue optional_double(const std::optional<double>& v) {
  if (!v) return JsonValue(nullptr);
  return JsonValue(*v);
}

JsonArray action_array(const ActionSet& actions) {
  JsonArray out;
  for (const auto& entry : actions.entries) {
    JsonObject o;
    o["cell"] = entry.cell_id;
    if (entry.power_delta_db) o["power_delta"] = *entry.power_delta_db;
    if (entry.subband_mask) o["subband_mask"] = *entry.subband_mask;
    if (entry.sleep) o["sleep"] = *entry.sleep;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace

JsonObject telemetry_record(const TelemetryReport& report) {
  JsonObject o;
  o["type"] = "telemetry";
  o["start_tti"] = report.start_tti;
  o["end_tti"] = report.end_tti;
  o["aggregate_se"] = report.aggregate_se_bps_hz;
  o["jain"] = report.jain_fairness;
  o["p95_delay_ms"] = report.p95_delay_ms;
  o["total_power_w"] = report.total_power_w;
  o["max_unattached"] = static_cast<int64_t>(report.max_unattached_ues);
  JsonArray cells;
  for (const auto& c : report.cells) {
    JsonObject cell;
    cell["cell"] = c.cell_id;
    cell["active"] = c.active;
    cell["subband_mask"] = c.subband_mask;
    cell["tx_power"] = c.tx_power_dbm;
    cell["rsrp_mean"] = optional_double(c.rsrp_mean_dbm);
    cell["rsrp_min"] = optional_double(c.rsrp_min_dbm);
    cell["sinr_mean"] = optional_double(c.sinr_mean_db);
    cell["nack_ratio"] = c.harq_nack_ratio;
    cell["buffer_bytes"] = c.mean_buffer_bytes;
    cell["utilization"] = c.prb_utilization;
    cell["throughput"] = c.throughput_bps;
    cell["energy_j"] = c.energy_j;
    cells.push_back(std::move(cell));
  }
  o["cells"] = std::move(cells);
  return o;
}

JsonObject decision_record(const RunRecord& record) {
  JsonObject o;
  o["type"] = "decision";
  o["tti"] = record.tti;
  o["reward"] = record.reward.total;
  o["reward_se"] = record.reward.se_term;
  o["reward_fair"] = record.reward.fairness_term;
  o["reward_lat"] = record.reward.latency_penalty;
  o["reward_energy"] = record.reward.energy_penalty;
  o["action"] = action_array(record.proposed);
  o["verdict"] = to_string(record.verdict.status);
  if (record.verdict.status == VerdictStatus::Rejected) {
    o["reject_reason"] = record.verdict.reject_reason;
  }
  o["shadow_run"] = record.shadow_run;
  if (record.shadow_run) {
    o["shadow_pass"] = record.shadow.pass;
    o["shadow_reward"] = record.shadow.predicted_reward;
    if (!record.shadow.pass) o["shadow_fail"] = record.shadow.fail_reason;
  }
  o["applied"] = record.applied;
  o["rollback"] = record.rollback;
  o["epsilon"] = record.diagnostics.epsilon;
  o["max_q"] = record.diagnostics.max_q;
  o["theta_norm"] = record.diagnostics.theta_norm;
  if (record.diagnostics.reset) o["agent_reset"] = true;
  return o;
}

JsonObject audit_record(const RunRecord& record) {
  JsonObject o;
  o["type"] = "audit";
  o["tti"] = record.tti;
  o["verdict"] = to_string(record.verdict.status);
  if (record.verdict.status == VerdictStatus::Rejected) {
    o["reason"] = record.verdict.reject_reason;
    o["detail"] = record.verdict.reject_detail;
  } else {
    JsonArray adjustments;
    for (const auto& a : record.verdict.adjustments) adjustments.push_back(a);
    o["adjustments"] = std::move(adjustments);
  }
  return o;
}

JsonObject rollback_record(const RunRecord& record) {
  JsonObject o;
  o["type"] = "rollback";
  o["tti"] = record.tti;
  o["reward"] = record.reward.total;
  return o;
}

std::vector<std::string> export_lines(const RunRecord& record) {
  std::vector<std::string> lines;
  lines.push_back(to_json_line(telemetry_record(record.report)));
  lines.push_back(to_json_line(decision_record(record)));
  if (record.verdict.status != VerdictStatus::Approved) {
    lines.push_back(to_json_line(audit_record(record)));
  }
  if (record.rollback) {
    lines.push_back(to_json_line(rollback_record(record)));
  }
  return lines;
}

ExportWriter::ExportWriter(const std::filesystem::path& path) : path_(path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::ios_base::failure("cannot open export sink: " + path.string());
}

void ExportWriter::on_record(const RunRecord& record) {
  for (const auto& line : export_lines(record)) out_ << line;
  if (!out_) throw std::ios_base::failure("write failed: " + path_.string());
}

void ExportWriter::flush() {
  out_.flush();
  if (!out_) throw std::ios_base::failure("flush failed: " + path_.string());
}

namespace {

class ComparingSink : public RecordSink {
 public:
  explicit ComparingSink(std::string expected) : expected_(std::move(expected)) {}

  void on_record(const RunRecord& record) override {
    for (const auto& line : export_lines(record)) {
      ++line_no_;
      if (diverged_) continue;
      if (cursor_ + line.size() > expected_.size() ||
          expected_.compare(cursor_, line.size(), line) != 0) {
        diverged_ = true;
        divergent_line_ = line_no_;
        regenerated_sample_ = line.substr(0, 160);
        continue;
      }
      cursor_ += line.size();
    }
  }

  bool diverged() const { return diverged_; }
  bool trailing_bytes() const { return cursor_ != expected_.size(); }
  int64_t divergent_line() const { return divergent_line_; }
  int64_t lines_seen() const { return line_no_; }
  const std::string& sample() const { return regenerated_sample_; }

 private:
  std::string expected_;
  std::size_t cursor_{0};
  int64_t line_no_{0};
  bool diverged_{false};
  int64_t divergent_line_{0};
  std::string regenerated_sample_;
};

}  // namespace

ReplayResult replay_compare(const Scenario& scenario, uint64_t seed,
                            const std::filesystem::path& export_path,
                            const EpisodeOptions& options) {
  std::ifstream in(export_path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open export file: " + export_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();

  ComparingSink sink(buf.str());
  EpisodeOptions replay_options = options;
  replay_options.sink = &sink;
  run_episode(scenario, seed, replay_options);

  ReplayResult result;
  if (sink.diverged()) {
    result.identical = false;
    result.first_divergent_line = sink.divergent_line();
    result.detail = "regenerated line " + std::to_string(sink.divergent_line()) +
                    " differs; starts with: " + sink.sample();
  } else if (sink.trailing_bytes()) {
    result.identical = false;
    result.first_divergent_line = sink.lines_seen() + 1;
    result.detail = "export file length differs from the regenerated stream";
  }
  return result;
}

}  // namespace ranloop
