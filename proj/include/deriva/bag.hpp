#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deriva/dataset.hpp"
#include "deriva/local_index.hpp"
#include "deriva/object_store.hpp"

namespace deriva {

struct BagManifestEntry {
  std::string checksum; // SHA-256 hex
  std::string path;     // payload path under data/, '/'-separated
};

struct FetchEntry {
  std::string url;
  std::uint64_t length = 0;
  std::string path;
};

struct BagDescriptor {
  Rid dataset;
  SemanticVersion version;
  SnapshotId snapshot = 0;
  std::string bag_checksum; // SHA-256 of tagmanifest-sha256.txt
  std::uint64_t total_length = 0; // payload + tag files, fully materialized
  std::vector<BagManifestEntry> payload;
  std::vector<FetchEntry> fetch;
};

struct MinidRecord {
  std::string id; // "minid:" + 12-char base-32 token
  std::vector<std::string> locations;
  std::string checksum;
  std::uint64_t length = 0;
  std::string title;
  std::string created;
};

struct ValidationReport {
  struct Failure {
    std::string path;
    std::string problem;
  };
  std::vector<Failure> failures;

  bool ok() const { return failures.empty(); }
};

// Remote traffic counters, instrumented so callers can assert exact cache
// behaviour (a cache hit performs zero fetches).
struct TransferStats {
  std::uint64_t asset_fetches = 0;  // fetch.txt payload downloads
  std::uint64_t bag_retrievals = 0; // holey-bag file downloads
  std::uint64_t bag_uploads = 0;    // holey-bag file uploads
  std::uint64_t exports = 0;        // bag preparation runs
};

// A fully materialized, validated bag in the cache.
class MaterializedDataset {
public:
  MaterializedDataset() = default;
  explicit MaterializedDataset(fs::path bag_dir) : path_(std::move(bag_dir)) {}

  const fs::path& path() const { return path_; }

  // Tabular access through the bag's SQLite index (built on first use).
  LocalIndex index() const { return LocalIndex::open_or_build(path_); }

private:
  fs::path path_;
};

// Deterministic export of dataset versions into BagIt bags, persistent
// identifier registration, two-stage cache resolution and materialization.
//
// Bag layout (fixed):
//   bagit.txt                 "BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n"
//   bag-info.txt              Dataset-RID / Dataset-Version / Snapshot-Id /
//                             Bagging-Date / Payload-Oxum
//   data/records/<Table>.csv  exported tables, rows sorted by RID
//   data/assets/...           asset payload (fetched on materialization)
//   manifest-sha256.txt       "<hex>  <path>\n", sorted by path
//   fetch.txt                 "<url>\t<length>\t<path>\n", sorted by path
//   tagmanifest-sha256.txt    digests of the other tag files, sorted
// The bag checksum is the SHA-256 of tagmanifest-sha256.txt, which
// transitively commits to every byte of the bag.
class BagService {
public:
  BagService(Catalog& catalog, ObjectStore& store);

  // Exports one dataset version into dest_dir (created; must be empty).
  // Asset files are not copied: they become fetch.txt entries pointing at
  // object-store URLs. Byte-deterministic for a given catalog state.
  BagDescriptor export_bag(const Rid& dataset, const SemanticVersion& version,
                           const fs::path& dest_dir);

  // Tag-level check always; `full` additionally digests every payload file
  // and requires every fetch entry to be present.
  ValidationReport validate_bag(const fs::path& bag_dir, bool full) const;

  MinidRecord register_minid(const BagDescriptor& descriptor,
                             const std::string& location_url,
                             const std::string& title);
  MinidRecord resolve_minid(const std::string& id) const;

  // Downloads/copies the bag if needed, fetches and verifies every payload
  // asset, runs full validation and writes the completion marker.
  fs::path materialize_bag(const std::string& bag_location,
                           const fs::path& dest_dir);

  // Two-stage resolution: an existing minid short-circuits bag preparation;
  // otherwise the bag is exported, registered and cached. Cache entries are
  // keyed by bag checksum.
  MaterializedDataset resolve_dataset(const Rid& dataset,
                                      const SemanticVersion& version,
                                      const fs::path& cache_dir);

  const TransferStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

  // Fetches a URL's bytes; used for fetch.txt entries and remote bags.
  // Default handles "store:<path>" against the local object store and
  // http(s):// against a remote service.
  void set_fetcher(std::function<std::string(const std::string&)> fetcher);

  static std::string read_bag_checksum(const fs::path& bag_dir);

private:
  Catalog& cat_;
  ObjectStore& store_;
  Datasets datasets_;
  TransferStats stats_;
  std::function<std::string(const std::string&)> fetcher_;

  void ensure_minid_table(Transaction& txn);
  std::string fetch_url(const std::string& url);
  void retrieve_bag_files(const std::string& location, const fs::path& dest);
};

} // namespace deriva
