#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cosafed/types.hpp"

namespace cosafed {

/// In-memory dataset: row-major features normalized to [0, 1] plus byte
/// labels. Read-only after construction; safe to share across workers.
struct Dataset {
  int rows = 0;
  int cols = 0;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;
  std::string source;  // "train" or "test"

  int n_features() const noexcept { return rows * cols; }
  std::size_t size() const noexcept { return labels.size(); }

  std::span<const float> example(std::size_t i) const noexcept {
    const auto f = static_cast<std::size_t>(n_features());
    return {features.data() + i * f, f};
  }
};

/// Parses big-endian IDX image/label files (gzip-compressed files are
/// inflated transparently). Pixels are divided by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::string source_tag = {});

/// Serializes back to raw IDX bytes; load_idx(save_idx(ds)) == ds.
void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path);

enum class PartitionMode { Equal, Random };

PartitionMode parse_partition_mode(const std::string& name);
const char* to_string(PartitionMode mode) noexcept;

/// Client shards: disjoint index lists covering the assigned examples,
/// every client nonempty.
struct Partition {
  PartitionMode mode = PartitionMode::Equal;
  std::vector<std::vector<std::int32_t>> assignments;

  int clients() const noexcept { return static_cast<int>(assignments.size()); }
};

/// Seeded shuffle, then contiguous shards of |D|/M; the remainder goes one
/// example each to the first |D| mod M clients.
Partition partition_equal(const Dataset& ds, int clients, std::uint64_t seed);

/// Shard sizes = min_size + spacings of M-1 uniform cut points over the
/// post-reserve pool; sizes sum to |D| and every size >= min_size.
Partition partition_random(const Dataset& ds, int clients, std::uint64_t seed,
                           int min_size = 100);

}  // namespace cosafed
