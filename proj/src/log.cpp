#include "ranloop/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace ranloop::log {

namespace {

Level detect_level() {
  const char* env = std::getenv("RANLOOP_LOG_LEVEL");
  if (!env) return Level::Info;
  const std::string value(env);
  if (value == "error") return Level::Error;
  if (value == "debug") return Level::Debug;
  return Level::Info;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void emit(Level at, const char* tag, const std::string& message) {
  if (level() < at) return;
  std::scoped_lock lock(sink_mutex());
  std::cerr << "[" << tag << "] " << message << "\n";
}

}  // namespace

Level level() {
  static const Level cached = detect_level();
  return cached;
}

void error(const std::string& message) { emit(Level::Error, "error", message); }
void info(const std::string& message) { emit(Level::Info, "info", message); }
void debug(const std::string& message) { emit(Level::Debug, "debug", message); }

}  // namespace ranloop::log
