#pragma once

#include <string>

#include "pronsim/models.hpp"

namespace pronsim {

// Binary checkpoint format, little-endian throughout:
//   magic "PSCK", u32 version, arch tag string ("rank" | "binary"),
//   encoder config, architecture fields, inventory hash,
//   then named parameter blocks (name, shape list, f64 data).
// Round trips are bit-exact.

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ArchTag { Rank, Binary };

void save_checkpoint(const std::string& path, const RankModel& model,
                     std::uint64_t inventory_hash);
void save_checkpoint(const std::string& path, const BinaryModel& model,
                     std::uint64_t inventory_hash);

ArchTag peek_checkpoint_arch(const std::string& path);

// Throws if the stored inventory hash differs from expected_inventory_hash.
RankModel load_rank_checkpoint(const std::string& path,
                               std::uint64_t expected_inventory_hash);
BinaryModel load_binary_checkpoint(const std::string& path,
                                   std::uint64_t expected_inventory_hash);

}  // namespace pronsim
