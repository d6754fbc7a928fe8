#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ranloop/loop.hpp"

namespace ranloop {

// Minimal JSON value with deterministic serialization: object keys are
// lexicographically sorted (std::map), floats use up to 9 significant
// digits, newline is LF. nlohmann/json reads the output back fine; writing
// goes through this emitter so exports stay byte-stable.
struct JsonValue;
using JsonArray = std::vector<JsonValue>;
using JsonObject = std::map<std::string, JsonValue>;

struct JsonValue {
  std::variant<std::nullptr_t, bool, int64_t, uint64_t, double, std::string, JsonArray,
               JsonObject>
      value{nullptr};

  JsonValue() = default;
  JsonValue(std::nullptr_t) {}
  JsonValue(bool b) : value(b) {}
  JsonValue(int v) : value(static_cast<int64_t>(v)) {}
  JsonValue(int64_t v) : value(v) {}
  JsonValue(uint64_t v) : value(v) {}
  JsonValue(uint32_t v) : value(static_cast<uint64_t>(v)) {}
  JsonValue(double v) : value(v) {}
  JsonValue(const char* s) : value(std::string(s)) {}
  JsonValue(std::string s) : value(std::move(s)) {}
  JsonValue(JsonArray a) : value(std::move(a)) {}
  JsonValue(JsonObject o) : value(std::move(o)) {}
};

/// Up-to-9-significant-digit, locale-independent float formatting.
std::string format_double_9sig(double v);

void write_json(std::string& out, const JsonValue& value);
std::string to_json_line(const JsonObject& record);  // includes trailing LF

JsonObject telemetry_record(const TelemetryReport& report);
JsonObject decision_record(const RunRecord& record);
JsonObject audit_record(const RunRecord& record);     // for Modified/Rejected verdicts
JsonObject rollback_record(const RunRecord& record);

/// The export lines one RunRecord produces, in order: telemetry, decision,
/// then audit and rollback records when applicable.
std::vector<std::string> export_lines(const RunRecord& record);

/// Streams export lines to a file sink.
class ExportWriter : public RecordSink {
 public:
  explicit ExportWriter(const std::filesystem::path& path);
  void on_record(const RunRecord& record) override;
  void flush();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

struct ReplayResult {
  bool identical{true};
  int64_t first_divergent_line{0};  // 1-based; 0 when identical
  std::string detail;
};

/// Re-runs the episode in memory and byte-compares against a previous export.
ReplayResult replay_compare(const Scenario& scenario, uint64_t seed,
                            const std::filesystem::path& export_path,
                            const EpisodeOptions& options = {});

}  // namespace ranloop
