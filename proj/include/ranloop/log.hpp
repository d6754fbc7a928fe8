#pragma once

#include <string>

namespace ranloop::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Level from RANLOOP_LOG_LEVEL in {error, info, debug}; defaults to info.
Level level();

void error(const std::string& message);
void info(const std::string& message);
void debug(const std::string& message);

}  // namespace ranloop::log
