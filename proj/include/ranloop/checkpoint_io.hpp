#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ranloop/loop.hpp"

namespace ranloop {

class CheckpointIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointFile {
  PersistedAgentState agent;
  PersistedSupervisorState supervisor;
};

inline constexpr int kCheckpointFormatVersion = 1;

/// Versioned text format; all floats round-trip exactly. Writes the whole
/// file or throws.
void save_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& data);

/// Loads fully before returning: a truncated or corrupt file yields an error
/// naming the offending line, never partial state. A version mismatch names
/// both versions.
CheckpointFile load_checkpoint_file(const std::filesystem::path& path);

}  // namespace ranloop
