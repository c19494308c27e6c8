#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deriva/catalog.hpp"
#include "deriva/vocabulary.hpp"

namespace deriva {

enum class BumpLevel { Major, Minor, Patch };

const char* to_string(BumpLevel level);
BumpLevel bump_level_from_string(const std::string& s);

struct SemanticVersion {
  std::int64_t major = 0;
  std::int64_t minor = 0;
  std::int64_t patch = 0;

  static SemanticVersion parse(const std::string& s);
  std::string str() const;
  SemanticVersion bumped(BumpLevel level) const;

  auto operator<=>(const SemanticVersion&) const = default;
};

struct DatasetVersionRecord {
  Rid rid; // the Dataset_Version row
  Rid dataset;
  SemanticVersion version;
  SnapshotId snapshot = 0;
  std::optional<Rid> execution;
  std::optional<std::string> minid;
  std::optional<std::string> bag_checksum;
  std::string description;
  std::string created;
};

struct DatasetMemberRef {
  Rid rid;
  std::string table;

  auto operator<=>(const DatasetMemberRef&) const = default;
};

// Overlapping members across a set of datasets (flattened closure).
struct OverlapReport {
  struct Overlap {
    Rid rid;
    std::string table;
    std::vector<Rid> datasets; // which of the checked datasets contain it
  };
  std::vector<Overlap> overlaps;

  bool empty() const { return overlaps.empty(); }
};

// Nested dataset collections with semantic versioning. Membership edges
// between datasets form a DAG; every membership change bumps the changed
// dataset and all of its ancestors (each exactly once) in a single catalog
// snapshot, so dataset_members(d, v) is exact for every recorded version.
class Datasets {
public:
  explicit Datasets(Catalog& catalog) : cat_(catalog), vocab_(catalog) {}

  // Creates a dataset at version 0.1.0. `types` are Dataset_Type term names,
  // synonyms or RIDs.
  std::pair<Rid, SemanticVersion> create(
      const std::string& description, const std::vector<std::string>& types,
      const std::optional<Rid>& execution = {});

  // Members are given by RID; their table is resolved by the catalog.
  // Adding members is a MINOR change, removing them a MAJOR one.
  SemanticVersion add_members(const Rid& dataset, const std::vector<Rid>& members,
                              const std::optional<Rid>& execution = {});
  SemanticVersion remove_members(const Rid& dataset,
                                 const std::vector<Rid>& members,
                                 const std::optional<Rid>& execution = {});

  SemanticVersion increment_version(const Rid& dataset, BumpLevel level,
                                    const std::string& description,
                                    const std::optional<Rid>& execution = {});

  std::vector<DatasetVersionRecord> versions(const Rid& dataset) const;
  DatasetVersionRecord latest_version(const Rid& dataset) const;
  DatasetVersionRecord version_record(const Rid& dataset,
                                      const SemanticVersion& version) const;

  // Membership as of the version's snapshot (latest version by default).
  // Non-flattening: nested datasets appear as Dataset references.
  std::vector<DatasetMemberRef> members(
      const Rid& dataset, const std::optional<SemanticVersion>& version = {}) const;

  // Transitive closure through nested datasets, evaluated at one snapshot;
  // contains both nested dataset RIDs and leaf members, root excluded.
  std::vector<DatasetMemberRef> members_flattened(
      const Rid& dataset, const std::optional<SemanticVersion>& version = {}) const;

  std::vector<Rid> parents(const Rid& dataset) const;
  std::vector<Rid> children(const Rid& dataset) const;

  // Pairwise overlap of the flattened member closures (live state).
  OverlapReport check_disjoint(const std::vector<Rid>& datasets) const;

  bool is_dataset(const Rid& rid) const;
  Entity require_dataset(const Rid& rid) const;

private:
  Catalog& cat_;
  Vocabularies vocab_;

  std::vector<Rid> ancestors(const Rid& dataset, SnapshotId at) const;
  void check_acyclic(const Rid& dataset, const Rid& new_member,
                     SnapshotId at) const;
  SemanticVersion bump_targets(Transaction& txn, const Rid& root,
                               BumpLevel level, const std::string& description,
                               const std::optional<Rid>& execution);
  std::vector<DatasetMemberRef> members_at(const Rid& dataset,
                                           SnapshotId snapshot) const;
};

DatasetVersionRecord version_record_from_entity(const Entity& row);

} // namespace deriva
