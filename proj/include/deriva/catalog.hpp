#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <thread>
#include <vector>

#include "deriva/clock.hpp"
#include "deriva/fsutil.hpp"
#include "deriva/types.hpp"

namespace deriva {

class Transaction;

struct RidLess {
  bool operator()(const Rid& a, const Rid& b) const;
};

// One MVCC version of a record: the full value map plus the snapshot
// interval [from, to) during which it is visible.
struct RecordVersion {
  Row values;
  std::string rct;
  std::string rmt;
  SnapshotId from = 0;
  SnapshotId to = kOpenSnapshot;

  bool live_at(SnapshotId s) const { return from <= s && to > s; }
};

// Snapshot-isolated, append-only entity store. All writes flow through
// single-writer transactions (serialized in-process by a mutex and across
// processes by a file lock on the transaction log); every commit advances
// the snapshot counter by exactly one. Readers see only committed snapshots.
//
// On-disk layout under the catalog root:
//   catalog.meta  — format version and RID prefix (written once)
//   log/txn.log   — one JSON record per committed transaction
// State is rebuilt by replaying the log; a torn final record (crash during
// append) is ignored, so nothing committed is ever lost.
class Catalog {
public:
  // Opens an existing catalog or initializes a fresh one (bootstrapping the
  // ML schema as snapshot 0).
  static std::unique_ptr<Catalog> open(const fs::path& root);

  ~Catalog();
  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  const fs::path& root() const { return root_; }
  const std::string& rid_prefix() const { return rid_prefix_; }

  SnapshotId current_snapshot() const;

  // ---- schema ----
  std::string define_table(const TableSpec& spec);
  TableDef table_def(const std::string& name,
                     std::optional<SnapshotId> as_of = {}) const;
  bool has_table(const std::string& name,
                 std::optional<SnapshotId> as_of = {}) const;
  std::vector<TableDef> list_tables(std::optional<SnapshotId> as_of = {}) const;

  // ---- entities ----
  std::vector<Rid> insert_entities(const std::string& table,
                                   const std::vector<Row>& rows);
  SnapshotId update_entities(const std::string& table,
                             const std::vector<std::pair<Rid, Row>>& updates);
  SnapshotId delete_entities(const std::string& table,
                             const std::vector<Rid>& rids);
  std::vector<Entity> query_entities(const std::string& table,
                                     const Filter& filter = {},
                                     std::optional<SnapshotId> as_of = {}) const;
  std::optional<Entity> get_entity(const std::string& table, const Rid& rid,
                                   std::optional<SnapshotId> as_of = {}) const;

  // Table that ever held this RID (RIDs are never reused, so the answer is
  // stable even after deletion). nullopt for RIDs never assigned.
  std::optional<std::string> table_of(const Rid& rid) const;

  // Starts a multi-operation transaction; all staged writes commit in one
  // snapshot. The returned object holds the writer locks until commit or
  // destruction (which aborts). While a transaction is open, reads performed
  // on the same thread observe the staged state.
  std::unique_ptr<Transaction> begin();

  // Replays transaction records appended by other processes since we last
  // looked. Readers that share a catalog directory with writer processes
  // call this to catch up.
  void refresh();

  std::string now() const { return clock_(); }
  void set_clock(ClockFn clock) { clock_ = std::move(clock); }

private:
  friend class Transaction;

  Catalog() = default;

  struct TableState {
    TableDef def;
    std::map<Rid, std::vector<RecordVersion>, RidLess> records;
  };

  fs::path root_;
  std::string rid_prefix_ = "1";
  std::uint64_t rid_counter_ = 0;
  SnapshotId snapshot_ = 0;
  bool any_commit_ = false;
  std::map<std::string, TableState> tables_;
  std::map<std::string, std::string> rid_table_; // every RID ever assigned
  AppendLog log_;
  ClockFn clock_;

  mutable std::shared_mutex mu_;
  std::atomic<std::thread::id> writer_thread_{};
  std::atomic<bool> writer_active_{false};

  bool this_thread_is_writer() const;
  SnapshotId read_horizon() const; // pending snapshot on the writer thread

  // State mutation shared by staging and replay. Callers hold the writer lock.
  void apply_table(const TableDef& def);
  void apply_insert(const std::string& table, const Rid& rid, Row values,
                    const std::string& ts, SnapshotId s);
  void apply_update(const std::string& table, const Rid& rid, const Row& patch,
                    const std::string& ts, SnapshotId s);
  void apply_delete(const std::string& table, const Rid& rid, SnapshotId s);

  void replay(const std::string& bytes, bool tolerate_torn_tail);
  void replay_locked(const std::string& bytes, bool tolerate_torn_tail);

  const TableState* find_table(const std::string& name) const;
  const RecordVersion* live_version(const std::string& table, const Rid& rid,
                                    SnapshotId s) const;

  void validate_row(const TableDef& def, const Row& row, bool partial,
                    SnapshotId pending, Row* normalized) const;
  void check_reference(const ColumnDef& col, const std::string& rid,
                       SnapshotId pending) const;
};

// Staged writes against a catalog. Operations validate eagerly (so errors
// surface at the failing call) and are applied to the in-memory state under
// the writer lock; commit serializes them to the log as one record. Abort
// (or destruction without commit) rolls the staged state back. The RID
// counter is not rolled back: RIDs burned by an aborted transaction are
// never reassigned.
class Transaction {
public:
  ~Transaction();
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  SnapshotId pending_snapshot() const { return pending_; }
  const std::string& commit_time() const { return time_; }

  std::string define_table(const TableSpec& spec,
                           TableRole role = TableRole::Entity,
                           const std::string& vocab_prefix = {});
  std::vector<Rid> insert(const std::string& table,
                          const std::vector<Row>& rows);
  void update(const std::string& table, const Rid& rid, const Row& patch);
  void erase(const std::string& table, const std::vector<Rid>& rids);

  SnapshotId commit();
  void abort();

private:
  friend class Catalog;
  explicit Transaction(Catalog& catalog);

  struct Undo {
    enum Kind { Table, Insert, Update, Delete } kind;
    std::string table;
    Rid rid;
  };

  Catalog& cat_;
  std::unique_lock<std::shared_mutex> lock_;
  std::unique_ptr<FileLock> file_lock_;
  SnapshotId pending_ = 0;
  std::string time_;
  std::vector<Undo> undo_;
  std::string ops_json_; // comma-joined op objects, built incrementally
  bool open_ = false;

  void require_open() const;
  void push_op(const std::string& op_json);
};

// Fresh-catalog schema: the eight ML tables and six built-in vocabularies
// created as snapshot 0.
extern const char* const kMlEntityTables[8];
extern const char* const kBuiltinVocabularies[6];

// Standard columns every vocabulary table carries.
std::vector<ColumnDef> vocabulary_columns();

// Standard columns every asset table carries (url, checksum, length,
// filename, description), prepended to any extra metadata columns.
std::vector<ColumnDef> asset_table_columns(std::vector<ColumnDef> extra);

} // namespace deriva
