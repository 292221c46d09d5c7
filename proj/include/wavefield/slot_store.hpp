#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "wavefield/wave.hpp"

namespace wavefield {

// On-disk layout, little-endian throughout.
//
//   segment header (64 bytes)
//     0   magic "WFLD"
//     4   u16 format version (1)
//     6   u32 dim
//     10  u64 record count
//     18  u8  kernel id
//     19  zero padding to 64
//   records, each zero-padded to a multiple of 64 bytes
//     u64 id, f32 amplitude[dim], f32 phase[dim]
//
// Sidecars: manifest.json and tombstones.bin (1 bit per record index,
// least significant bit first).
namespace store_format {
inline constexpr char kMagic[4] = {'W', 'F', 'L', 'D'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 64;
inline constexpr std::size_t kAlignment = 64;
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kTombstoneName = "tombstones.bin";

constexpr std::size_t record_size(std::size_t dim) noexcept {
  const std::size_t raw = 8 + 8 * dim;
  return (raw + kAlignment - 1) / kAlignment * kAlignment;
}

std::filesystem::path segment_path(const std::filesystem::path& dir, std::size_t index);
}  // namespace store_format

struct QueryResult {
  std::uint64_t id = 0;
  ResonanceScore score;
  std::size_t rank = 0;  // 1-based

  friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

struct StoreOptions {
  std::size_t dim = 0;
  Kernel kernel_default = Kernel::coherence;
  std::uint64_t seed = 0;  // provenance only, echoed in the manifest
  std::size_t segment_capacity = 65536;
};

struct ScanOptions {
  std::optional<Kernel> kernel;  // store default when unset
  std::size_t threads = 1;
};

struct StoredRecord {
  std::uint64_t id;
  WavePattern pattern;
};

// File-backed field memory with exact full-scan retrieval.
//
// Single writer, many readers. put/remove stage changes; flush() persists
// them and atomically publishes a new snapshot. Queries always run against
// the most recently published snapshot and never block the writer.
class SlotStore {
 public:
  // Throws StoreIO if `dir` already holds a manifest.
  static SlotStore create(const std::filesystem::path& dir, const StoreOptions& options);
  // Validates manifest, segment headers and sizes; throws CorruptStore.
  static SlotStore open(const std::filesystem::path& dir);
  static SlotStore in_memory(const StoreOptions& options);

  SlotStore(SlotStore&&) noexcept;
  SlotStore& operator=(SlotStore&&) noexcept;
  ~SlotStore();

  // Throws DimMismatch, DuplicateId (id already live), ZeroEnergy.
  void put(std::uint64_t id, const WavePattern& pattern);
  // Tombstones a live id; throws InvalidArgument if it is not live.
  void remove(std::uint64_t id);
  void flush();
  // Rewrites segments without tombstoned records; flushes first.
  void compact();

  // Throws EmptyStore, DimMismatch, ZeroEnergy, InvalidArgument (k = 0).
  std::vector<QueryResult> query_topk(const WavePattern& probe, std::size_t k,
                                      const ScanOptions& options = {}) const;

  // Writer view, including staged records.
  std::optional<WavePattern> get(std::uint64_t id) const;
  bool contains(std::uint64_t id) const;

  // Every live record of the published snapshot in storage order.
  std::vector<StoredRecord> records() const;

  std::size_t dim() const noexcept;
  Kernel kernel_default() const noexcept;
  std::uint64_t seed() const noexcept;
  std::size_t record_count() const noexcept;  // writer view, tombstoned included
  std::size_t live_count() const noexcept;    // writer view
  std::size_t segment_count() const noexcept;
  bool persistent() const noexcept;
  const std::filesystem::path& path() const noexcept;

  // FNV-1a over the segment bytes as they are (or would be) on disk.
  std::uint64_t checksum() const;

 private:
  struct Impl;
  explicit SlotStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace wavefield
