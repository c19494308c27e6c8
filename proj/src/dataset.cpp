#include "deriva/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "deriva/rid.hpp"

namespace deriva {

using nlohmann::json;

const char* to_string(BumpLevel level) {
  switch (level) {
    case BumpLevel::Major: return "major";
    case BumpLevel::Minor: return "minor";
    case BumpLevel::Patch: return "patch";
  }
  return "patch";
}

BumpLevel bump_level_from_string(const std::string& s) {
  if (s == "major") return BumpLevel::Major;
  if (s == "minor") return BumpLevel::Minor;
  if (s == "patch") return BumpLevel::Patch;
  fail(ErrorKind::Validation, "bad_bump_level",
       "bump level must be major, minor or patch: " + s);
}

SemanticVersion SemanticVersion::parse(const std::string& s) {
  SemanticVersion v;
  std::size_t a = s.find('.');
  std::size_t b = a == std::string::npos ? std::string::npos : s.find('.', a + 1);
  if (a == std::string::npos || b == std::string::npos)
    fail(ErrorKind::Validation, "bad_version", "not a semantic version: " + s);
  try {
    v.major = std::stoll(s.substr(0, a));
    v.minor = std::stoll(s.substr(a + 1, b - a - 1));
    v.patch = std::stoll(s.substr(b + 1));
  } catch (const std::exception&) {
    fail(ErrorKind::Validation, "bad_version", "not a semantic version: " + s);
  }
  if (v.major < 0 || v.minor < 0 || v.patch < 0)
    fail(ErrorKind::Validation, "bad_version", "not a semantic version: " + s);
  return v;
}

std::string SemanticVersion::str() const {
  return std::to_string(major) + "." + std::to_string(minor) + "." +
         std::to_string(patch);
}

SemanticVersion SemanticVersion::bumped(BumpLevel level) const {
  switch (level) {
    case BumpLevel::Major: return {major + 1, 0, 0};
    case BumpLevel::Minor: return {major, minor + 1, 0};
    case BumpLevel::Patch: return {major, minor, patch + 1};
  }
  return *this;
}

DatasetVersionRecord version_record_from_entity(const Entity& row) {
  DatasetVersionRecord rec;
  rec.rid = row.rid;
  rec.dataset = row.value("Dataset").as_text();
  rec.version = {row.value("Major").as_integer(), row.value("Minor").as_integer(),
                 row.value("Patch").as_integer()};
  rec.snapshot = static_cast<SnapshotId>(row.value("Snapshot").as_integer());
  if (!row.value("Execution").is_null())
    rec.execution = row.value("Execution").as_text();
  if (!row.value("Minid").is_null()) rec.minid = row.value("Minid").as_text();
  if (!row.value("Bag_Checksum").is_null())
    rec.bag_checksum = row.value("Bag_Checksum").as_text();
  if (!row.value("Description").is_null())
    rec.description = row.value("Description").as_text();
  rec.created = row.rct;
  return rec;
}

bool Datasets::is_dataset(const Rid& rid) const {
  return cat_.get_entity("Dataset", rid).has_value();
}

Entity Datasets::require_dataset(const Rid& rid) const {
  auto row = cat_.get_entity("Dataset", rid);
  if (!row)
    fail(ErrorKind::NotFound, "dataset_not_found", "no such dataset: " + rid);
  return *row;
}

std::pair<Rid, SemanticVersion> Datasets::create(
    const std::string& description, const std::vector<std::string>& types,
    const std::optional<Rid>& execution) {
  if (description.empty())
    fail(ErrorKind::Validation, "bad_description",
         "dataset description must be non-empty");
  json type_rids = json::array();
  for (const auto& t : types)
    type_rids.push_back(vocab_.resolve("Dataset_Type", t).rid);

  auto txn = cat_.begin();
  Rid rid = txn->insert("Dataset",
                        {{{"Description", Value::text(description)},
                          {"Dataset_Types", Value::text(type_rids.dump())}}})
                .front();
  SemanticVersion initial{0, 1, 0};
  txn->insert(
      "Dataset_Version",
      {{{"Dataset", Value::text(rid)},
        {"Major", Value::integer(initial.major)},
        {"Minor", Value::integer(initial.minor)},
        {"Patch", Value::integer(initial.patch)},
        {"Snapshot",
         Value::integer(static_cast<std::int64_t>(txn->pending_snapshot()))},
        {"Execution",
         execution ? Value::text(*execution) : Value::null()},
        {"Description", Value::text("initial version")}}});
  txn->commit();
  return {rid, initial};
}

std::vector<Rid> Datasets::ancestors(const Rid& dataset, SnapshotId at) const {
  std::set<Rid> seen;
  std::vector<Rid> frontier{dataset};
  while (!frontier.empty()) {
    Rid current = frontier.back();
    frontier.pop_back();
    auto rows = cat_.query_entities(
        "Dataset_Member", Filter{}.where("Member", Value::text(current)), at);
    for (const auto& row : rows) {
      Rid parent = row.value("Dataset").as_text();
      if (seen.insert(parent).second) frontier.push_back(parent);
    }
  }
  seen.erase(dataset);
  return {seen.begin(), seen.end()};
}

void Datasets::check_acyclic(const Rid& dataset, const Rid& new_member,
                             SnapshotId at) const {
  if (dataset == new_member)
    fail(ErrorKind::Cycle, "membership_cycle",
         "dataset " + dataset + " cannot contain itself");
  // Adding edge dataset ⊃ new_member closes a cycle iff dataset is reachable
  // from new_member through existing containment edges.
  std::vector<std::vector<Rid>> stack{{new_member}};
  std::set<Rid> seen{new_member};
  while (!stack.empty()) {
    auto path = stack.back();
    stack.pop_back();
    auto rows = cat_.query_entities(
        "Dataset_Member",
        Filter{}
            .where("Dataset", Value::text(path.back()))
            .where("Member_Table", Value::text("Dataset")),
        at);
    for (const auto& row : rows) {
      Rid child = row.value("Member").as_text();
      auto next = path;
      next.push_back(child);
      if (child == dataset) {
        std::string chain = dataset + " > ";
        for (auto it = next.rbegin(); it != next.rend(); ++it) {
          if (it != next.rbegin()) chain += " > ";
          chain += *it;
        }
        fail(ErrorKind::Cycle, "membership_cycle",
             "adding " + new_member + " to " + dataset +
                 " would close the cycle: " + chain);
      }
      if (seen.insert(child).second) stack.push_back(next);
    }
  }
}

SemanticVersion Datasets::bump_targets(Transaction& txn, const Rid& root,
                                       BumpLevel level,
                                       const std::string& description,
                                       const std::optional<Rid>& execution) {
  SnapshotId pending = txn.pending_snapshot();
  std::vector<Rid> targets = ancestors(root, pending);
  targets.push_back(root);
  std::sort(targets.begin(), targets.end(), rid_less);

  SemanticVersion root_version;
  for (const auto& target : targets) {
    SemanticVersion next = latest_version(target).version.bumped(level);
    txn.insert(
        "Dataset_Version",
        {{{"Dataset", Value::text(target)},
          {"Major", Value::integer(next.major)},
          {"Minor", Value::integer(next.minor)},
          {"Patch", Value::integer(next.patch)},
          {"Snapshot", Value::integer(static_cast<std::int64_t>(pending))},
          {"Execution", execution ? Value::text(*execution) : Value::null()},
          {"Description",
           Value::text(target == root ? description
                                      : "propagated from " + root)}}});
    if (target == root) root_version = next;
  }
  return root_version;
}

SemanticVersion Datasets::add_members(const Rid& dataset,
                                      const std::vector<Rid>& members,
                                      const std::optional<Rid>& execution) {
  require_dataset(dataset);
  auto txn = cat_.begin();
  SnapshotId pending = txn->pending_snapshot();

  std::set<Rid> staged;
  std::vector<Row> rows;
  for (const auto& member : members) {
    auto table = cat_.table_of(member);
    if (!table || !cat_.get_entity(*table, member))
      fail(ErrorKind::DanglingReference, "dangling_reference",
           "member " + member + " is not a live record");
    if (!staged.insert(member).second)
      fail(ErrorKind::Duplicate, "duplicate_member",
           "member listed twice: " + member);
    if (!cat_.query_entities("Dataset_Member",
                             Filter{}
                                 .where("Dataset", Value::text(dataset))
                                 .where("Member", Value::text(member)))
             .empty())
      fail(ErrorKind::Duplicate, "duplicate_member",
           member + " is already a member of " + dataset);
    if (*table == "Dataset") check_acyclic(dataset, member, pending);
    rows.push_back({{"Dataset", Value::text(dataset)},
                    {"Member", Value::text(member)},
                    {"Member_Table", Value::text(*table)}});
  }
  if (!rows.empty()) txn->insert("Dataset_Member", rows);

  auto version = bump_targets(
      *txn, dataset, BumpLevel::Minor,
      "added " + std::to_string(members.size()) + " members", execution);
  txn->commit();
  return version;
}

SemanticVersion Datasets::remove_members(const Rid& dataset,
                                         const std::vector<Rid>& members,
                                         const std::optional<Rid>& execution) {
  require_dataset(dataset);
  auto txn = cat_.begin();

  std::vector<Rid> row_rids;
  for (const auto& member : members) {
    auto rows = cat_.query_entities("Dataset_Member",
                                    Filter{}
                                        .where("Dataset", Value::text(dataset))
                                        .where("Member", Value::text(member)));
    if (rows.empty())
      fail(ErrorKind::NotFound, "member_not_present",
           member + " is not a member of " + dataset);
    row_rids.push_back(rows.front().rid);
  }
  txn->erase("Dataset_Member", row_rids);

  auto version = bump_targets(
      *txn, dataset, BumpLevel::Major,
      "removed " + std::to_string(members.size()) + " members", execution);
  txn->commit();
  return version;
}

SemanticVersion Datasets::increment_version(const Rid& dataset, BumpLevel level,
                                            const std::string& description,
                                            const std::optional<Rid>& execution) {
  require_dataset(dataset);
  auto txn = cat_.begin();
  auto version = bump_targets(*txn, dataset, level, description, execution);
  txn->commit();
  return version;
}

std::vector<DatasetVersionRecord> Datasets::versions(const Rid& dataset) const {
  require_dataset(dataset);
  std::vector<DatasetVersionRecord> out;
  for (const auto& row : cat_.query_entities(
           "Dataset_Version", Filter{}.where("Dataset", Value::text(dataset))))
    out.push_back(version_record_from_entity(row));
  std::sort(out.begin(), out.end(),
            [](const DatasetVersionRecord& a, const DatasetVersionRecord& b) {
              return a.version < b.version;
            });
  return out;
}

DatasetVersionRecord Datasets::latest_version(const Rid& dataset) const {
  auto all = versions(dataset);
  if (all.empty())
    fail(ErrorKind::Integrity, "version_missing",
         "dataset " + dataset + " has no version records");
  return all.back();
}

DatasetVersionRecord Datasets::version_record(
    const Rid& dataset, const SemanticVersion& version) const {
  for (const auto& rec : versions(dataset))
    if (rec.version == version) return rec;
  fail(ErrorKind::NotFound, "version_not_found",
       "dataset " + dataset + " has no version " + version.str());
}

std::vector<DatasetMemberRef> Datasets::members_at(const Rid& dataset,
                                                   SnapshotId snapshot) const {
  std::vector<DatasetMemberRef> out;
  for (const auto& row : cat_.query_entities(
           "Dataset_Member", Filter{}.where("Dataset", Value::text(dataset)),
           snapshot))
    out.push_back(
        {row.value("Member").as_text(), row.value("Member_Table").as_text()});
  return out;
}

std::vector<DatasetMemberRef> Datasets::members(
    const Rid& dataset, const std::optional<SemanticVersion>& version) const {
  auto rec = version ? version_record(dataset, *version)
                     : latest_version(dataset);
  return members_at(dataset, rec.snapshot);
}

std::vector<DatasetMemberRef> Datasets::members_flattened(
    const Rid& dataset, const std::optional<SemanticVersion>& version) const {
  auto rec = version ? version_record(dataset, *version)
                     : latest_version(dataset);
  std::map<Rid, DatasetMemberRef> closure;
  std::set<Rid> visited{dataset};
  std::vector<Rid> frontier{dataset};
  while (!frontier.empty()) {
    Rid current = frontier.back();
    frontier.pop_back();
    for (const auto& ref : members_at(current, rec.snapshot)) {
      closure.emplace(ref.rid, ref);
      if (ref.table == "Dataset" && visited.insert(ref.rid).second)
        frontier.push_back(ref.rid);
    }
  }
  closure.erase(dataset);
  std::vector<DatasetMemberRef> out;
  for (const auto& [rid, ref] : closure) out.push_back(ref);
  std::sort(out.begin(), out.end(),
            [](const DatasetMemberRef& a, const DatasetMemberRef& b) {
              return rid_less(a.rid, b.rid);
            });
  return out;
}

std::vector<Rid> Datasets::parents(const Rid& dataset) const {
  require_dataset(dataset);
  std::vector<Rid> out;
  for (const auto& row : cat_.query_entities(
           "Dataset_Member", Filter{}.where("Member", Value::text(dataset))))
    out.push_back(row.value("Dataset").as_text());
  std::sort(out.begin(), out.end(), rid_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Rid> Datasets::children(const Rid& dataset) const {
  require_dataset(dataset);
  std::vector<Rid> out;
  for (const auto& row : cat_.query_entities(
           "Dataset_Member",
           Filter{}
               .where("Dataset", Value::text(dataset))
               .where("Member_Table", Value::text("Dataset"))))
    out.push_back(row.value("Member").as_text());
  return out;
}

OverlapReport Datasets::check_disjoint(const std::vector<Rid>& datasets) const {
  std::map<Rid, std::pair<std::string, std::vector<Rid>>> holders;
  for (const auto& dataset : datasets) {
    require_dataset(dataset);
    for (const auto& ref : members_flattened(dataset))
      holders[ref.rid] = {ref.table, {}};
  }
  for (const auto& dataset : datasets)
    for (const auto& ref : members_flattened(dataset))
      holders[ref.rid].second.push_back(dataset);

  OverlapReport report;
  for (const auto& [rid, entry] : holders) {
    if (entry.second.size() < 2) continue;
    report.overlaps.push_back({rid, entry.first, entry.second});
  }
  std::sort(report.overlaps.begin(), report.overlaps.end(),
            [](const OverlapReport::Overlap& a, const OverlapReport::Overlap& b) {
              return rid_less(a.rid, b.rid);
            });
  return report;
}

} // namespace deriva
