#pragma once

// Experiment configuration files, schedule checkpoints and training logs.
//
// Both the configuration and the checkpoint are JSON text. The configuration
// is a flat object; unknown keys are rejected. A checkpoint records the
// schedule, the full training configuration and a SHA-256 over its canonical
// payload, so any edit to the stored numbers is detected on load.

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcast/trainer.hpp"
#include "mcast/unfolded.hpp"

namespace mcast {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::string_view kCheckpointFormat = "mcast-unfolded-schedule";

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kUnreadable, kSchema };
  ConfigError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kMalformed, kVersion, kHashMismatch };
  CheckpointError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Parses a flat JSON configuration. Required keys: algorithm, n_antennas,
/// n_users, depth. Throws ConfigError(kSchema) on unknown keys, wrong types
/// or invalid values.
TrainConfig parse_config(std::string_view text);
/// Throws ConfigError(kUnreadable) when the file cannot be read.
TrainConfig load_config(const std::filesystem::path& path);
/// Canonical flat JSON (sorted keys, no whitespace).
std::string config_to_json(const TrainConfig& cfg);

struct Checkpoint {
  UnfoldedSchedule schedule;
  TrainConfig config;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Shortest text that parses back to the same double ("%.17g").
std::string format_double(double v);

/// Columns: depth,batch_index,mean_loss,wall_time_ms.
void write_train_log(std::ostream& out, const std::vector<TrainLogEntry>& log);

}  // namespace mcast
