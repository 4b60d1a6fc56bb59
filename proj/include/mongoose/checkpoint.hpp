#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mongoose/policy.hpp"
#include "mongoose/trainer.hpp"

namespace mongoose {

// Versioned checkpoint: text header (inventory + per-segment checksums)
// followed by little-endian 64-bit payload. Round-trips bit-exactly.
struct Checkpoint {
  int version = 1;
  int dimension = 0;
  int hidden_size = 0;
  long step = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config_echo;
  PolicyParams params;
  bool has_adam = false;
  AdamState adam;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Throws on version mismatch, truncated payload, or checksum failure (the
// error names the offending segment).
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mongoose
