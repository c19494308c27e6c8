#include "deriva/catalog.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

#include "deriva/digest.hpp"
#include "deriva/rid.hpp"

namespace deriva {

using nlohmann::json;

static constexpr int kFormatVersion = 1;

bool RidLess::operator()(const Rid& a, const Rid& b) const {
  return rid_less(a, b);
}

static bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

static bool reserved_column(const std::string& name) {
  return name == "RID" || name == "RCT" || name == "RMT";
}

// ---- value <-> json ----

static json value_to_json(const Value& v) {
  if (v.is_null()) return nullptr;
  if (v.is_text()) return v.as_text();
  if (v.is_integer()) return v.as_integer();
  if (v.is_boolean()) return v.as_boolean();
  return v.as_real();
}

static Value value_from_json(const json& j) {
  if (j.is_null()) return Value::null();
  if (j.is_string()) return Value::text(j.get<std::string>());
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_float()) return Value::real(j.get<double>());
  if (j.is_number_integer() || j.is_number_unsigned())
    return Value::integer(j.get<std::int64_t>());
  fail(ErrorKind::Validation, "bad_value_json",
       "unsupported JSON value: " + j.dump());
}

static json row_to_json(const Row& row) {
  json out = json::object();
  for (const auto& [k, v] : row) out[k] = value_to_json(v);
  return out;
}

static Row row_from_json(const json& j) {
  Row out;
  for (auto it = j.begin(); it != j.end(); ++it)
    out[it.key()] = value_from_json(it.value());
  return out;
}

static json tabledef_to_json(const TableDef& def) {
  json cols = json::array();
  for (const auto& c : def.columns) {
    cols.push_back({{"n", c.name},
                    {"k", to_string(c.kind)},
                    {"ref", c.ref_target},
                    {"null", c.nullable}});
  }
  return {{"name", def.name},
          {"kind", to_string(def.schema_kind)},
          {"role", to_string(def.role)},
          {"prefix", def.vocab_prefix},
          {"cols", cols}};
}

static TableDef tabledef_from_json(const json& j) {
  TableDef def;
  def.name = j.at("name").get<std::string>();
  def.schema_kind = schema_kind_from_string(j.at("kind").get<std::string>());
  def.role = table_role_from_string(j.at("role").get<std::string>());
  def.vocab_prefix = j.at("prefix").get<std::string>();
  for (const auto& c : j.at("cols")) {
    ColumnDef col;
    col.name = c.at("n").get<std::string>();
    col.kind = value_kind_from_string(c.at("k").get<std::string>());
    col.ref_target = c.at("ref").get<std::string>();
    col.nullable = c.at("null").get<bool>();
    def.columns.push_back(std::move(col));
  }
  return def;
}

// ---- catalog lifecycle ----

const char* const kMlEntityTables[8] = {
    "Dataset",   "Dataset_Version", "Dataset_Member",     "Dataset_Execution",
    "Workflow",  "Execution",       "Execution_Asset",    "Feature_Definition",
};

const char* const kBuiltinVocabularies[6] = {
    "Dataset_Type", "Execution_Status", "Asset_Role",
    "Feature_Name", "Workflow_Type",    "Annotation_Type",
};

std::vector<ColumnDef> vocabulary_columns() {
  return {
      {"Name", ValueKind::Text, "", false},
      {"Synonyms", ValueKind::Text, "", false}, // JSON array of strings
      {"Description", ValueKind::Text, "", true},
      {"CURIE", ValueKind::Text, "", false},
      {"Deprecated", ValueKind::Boolean, "", false},
  };
}

std::vector<ColumnDef> asset_table_columns(std::vector<ColumnDef> extra) {
  std::vector<ColumnDef> cols = {
      {"URL", ValueKind::Text, "", false},
      {"Checksum", ValueKind::Text, "", false},
      {"Length", ValueKind::Integer, "", false},
      {"Filename", ValueKind::Text, "", false},
      {"Description", ValueKind::Text, "", true},
  };
  for (auto& c : extra) cols.push_back(std::move(c));
  return cols;
}

static void bootstrap_ml_schema(Transaction& txn) {
  const char* const prefixes[6] = {"DST", "EST", "ROL", "FTN", "WFT", "ANT"};
  for (int i = 0; i < 6; ++i) {
    TableSpec spec;
    spec.name = kBuiltinVocabularies[i];
    spec.schema_kind = SchemaKind::Ml;
    spec.columns = vocabulary_columns();
    txn.define_table(spec, TableRole::Vocabulary, prefixes[i]);
  }

  auto ml_table = [&txn](const std::string& name,
                         std::vector<ColumnDef> columns) {
    TableSpec spec;
    spec.name = name;
    spec.schema_kind = SchemaKind::Ml;
    spec.columns = std::move(columns);
    txn.define_table(spec, TableRole::Entity);
  };

  ml_table("Dataset",
           {{"Description", ValueKind::Text, "", false},
            {"Dataset_Types", ValueKind::Text, "", false}}); // JSON term RIDs
  ml_table("Workflow",
           {{"Name", ValueKind::Text, "", false},
            {"URL", ValueKind::Text, "", false},
            {"Workflow_Type", ValueKind::TermRef, "Workflow_Type", false},
            {"Version", ValueKind::Text, "", true},
            {"Checksum", ValueKind::Text, "", false}});
  ml_table("Execution",
           {{"Workflow", ValueKind::RidRef, "Workflow", false},
            {"Status", ValueKind::TermRef, "Execution_Status", false},
            {"Status_Detail", ValueKind::Text, "", true},
            {"Description", ValueKind::Text, "", true},
            {"Started", ValueKind::Timestamp, "", true},
            {"Stopped", ValueKind::Timestamp, "", true},
            {"Duration", ValueKind::Float, "", true},
            {"Workdir", ValueKind::Text, "", true}});
  ml_table("Dataset_Version",
           {{"Dataset", ValueKind::RidRef, "Dataset", false},
            {"Major", ValueKind::Integer, "", false},
            {"Minor", ValueKind::Integer, "", false},
            {"Patch", ValueKind::Integer, "", false},
            {"Snapshot", ValueKind::Integer, "", false},
            {"Execution", ValueKind::RidRef, "Execution", true},
            {"Minid", ValueKind::Text, "", true},
            {"Bag_Checksum", ValueKind::Text, "", true},
            {"Description", ValueKind::Text, "", true}});
  ml_table("Dataset_Member",
           {{"Dataset", ValueKind::RidRef, "Dataset", false},
            {"Member", ValueKind::RidAny, "", false},
            {"Member_Table", ValueKind::Text, "", false}});
  ml_table("Dataset_Execution",
           {{"Dataset", ValueKind::RidRef, "Dataset", false},
            {"Execution", ValueKind::RidRef, "Execution", false},
            {"Version", ValueKind::Text, "", false}});
  ml_table("Execution_Asset",
           {{"Execution", ValueKind::RidRef, "Execution", false},
            {"Asset", ValueKind::RidAny, "", false},
            {"Asset_Table", ValueKind::Text, "", false},
            {"Role", ValueKind::TermRef, "Asset_Role", false}});
  ml_table("Feature_Definition",
           {{"Target_Table", ValueKind::Text, "", false},
            {"Feature_Name", ValueKind::TermRef, "Feature_Name", false},
            {"Assoc_Table", ValueKind::Text, "", false},
            {"Value_Columns", ValueKind::Text, "", false}}); // JSON spec

  auto term = [](const std::string& name, const std::string& curie) {
    return Row{{"Name", Value::text(name)},
               {"Synonyms", Value::text("[]")},
               {"Description", Value::null()},
               {"CURIE", Value::text(curie)},
               {"Deprecated", Value::boolean(false)}};
  };
  txn.insert("Execution_Status",
             {term("created", "EST:1"), term("running", "EST:2"),
              term("completed", "EST:3"), term("failed", "EST:4")});
  txn.insert("Asset_Role", {term("input", "ROL:1"), term("output", "ROL:2")});
}

std::unique_ptr<Catalog> Catalog::open(const fs::path& root) {
  if (fs::exists(root) && !fs::is_directory(root))
    fail(ErrorKind::Io, "not_a_directory",
         "catalog root is not a directory: " + root.string());
  ensure_dir(root);
  ensure_dir(root / "log");

  auto cat = std::unique_ptr<Catalog>(new Catalog());
  cat->root_ = root;
  cat->clock_ = now_timestamp;
  cat->log_ = AppendLog(root / "log" / "txn.log");

  fs::path meta_path = root / "catalog.meta";
  bool fresh = !fs::exists(meta_path);
  if (fresh) {
    if (fs::exists(cat->log_.path()))
      fail(ErrorKind::Integrity, "catalog_corrupt",
           "transaction log present but catalog.meta missing");
    json meta = {{"format_version", kFormatVersion},
                 {"rid_prefix", cat->rid_prefix_},
                 {"created", cat->now()}};
    write_file_atomic(meta_path, meta.dump(2) + "\n");
  } else {
    json meta;
    try {
      meta = json::parse(read_file(meta_path));
    } catch (const json::exception&) {
      fail(ErrorKind::Integrity, "catalog_corrupt",
           "catalog.meta is not valid JSON");
    }
    int version = meta.value("format_version", -1);
    if (version != kFormatVersion)
      fail(ErrorKind::Version, "format_version_mismatch",
           "catalog format version " + std::to_string(version) +
               " unsupported (expected " + std::to_string(kFormatVersion) +
               ")");
    cat->rid_prefix_ = meta.value("rid_prefix", std::string("1"));
  }

  {
    FileLock lock(cat->log_.lock_path());
    std::string bytes = cat->log_.read_new();
    cat->replay_locked(bytes, /*tolerate_torn_tail=*/true);
  }

  if (!cat->any_commit_) {
    auto txn = cat->begin();
    bootstrap_ml_schema(*txn);
    txn->commit();
  }
  return cat;
}

Catalog::~Catalog() = default;

bool Catalog::this_thread_is_writer() const {
  return writer_active_.load(std::memory_order_acquire) &&
         writer_thread_.load(std::memory_order_acquire) ==
             std::this_thread::get_id();
}

SnapshotId Catalog::read_horizon() const {
  if (this_thread_is_writer()) return snapshot_ + (any_commit_ ? 1 : 0);
  return snapshot_;
}

SnapshotId Catalog::current_snapshot() const {
  if (this_thread_is_writer()) return snapshot_;
  std::shared_lock lk(mu_);
  return snapshot_;
}

// ---- replay ----

void Catalog::replay(const std::string& bytes, bool tolerate_torn_tail) {
  std::unique_lock lk(mu_);
  replay_locked(bytes, tolerate_torn_tail);
}

void Catalog::replay_locked(const std::string& bytes, bool tolerate_torn_tail) {
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) {
      if (tolerate_torn_tail) break; // torn final record: not committed
      fail(ErrorKind::Integrity, "log_corrupt",
           "transaction log ends mid-record");
    }
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      bool at_tail = pos >= bytes.size();
      if (at_tail && tolerate_torn_tail) break;
      fail(ErrorKind::Integrity, "log_corrupt",
           "transaction log record is not valid JSON");
    }
    SnapshotId s = rec.at("s").get<SnapshotId>();
    if (any_commit_ && s != snapshot_ + 1)
      fail(ErrorKind::Integrity, "log_corrupt",
           "transaction log snapshot ids are not contiguous");
    if (!any_commit_ && s != 0)
      fail(ErrorKind::Integrity, "log_corrupt",
           "transaction log does not start at snapshot 0");
    std::string ts = rec.at("t").get<std::string>();
    for (const auto& op : rec.at("ops")) {
      std::string kind = op.at("op").get<std::string>();
      if (kind == "table") {
        TableDef def = tabledef_from_json(op.at("def"));
        def.valid_from = s;
        apply_table(def);
      } else if (kind == "ins") {
        apply_insert(op.at("t").get<std::string>(),
                     op.at("r").get<std::string>(),
                     row_from_json(op.at("v")), ts, s);
      } else if (kind == "upd") {
        apply_update(op.at("t").get<std::string>(),
                     op.at("r").get<std::string>(),
                     row_from_json(op.at("v")), ts, s);
      } else if (kind == "del") {
        apply_delete(op.at("t").get<std::string>(),
                     op.at("r").get<std::string>(), s);
      } else {
        fail(ErrorKind::Integrity, "log_corrupt", "unknown log op: " + kind);
      }
    }
    rid_counter_ = rec.at("c").get<std::uint64_t>();
    snapshot_ = s;
    any_commit_ = true;
  }
}

void Catalog::refresh() {
  std::unique_lock lk(mu_);
  FileLock lock(log_.lock_path());
  std::string bytes = log_.read_new();
  if (!bytes.empty()) replay_locked(bytes, /*tolerate_torn_tail=*/false);
}

// ---- state mutation ----

void Catalog::apply_table(const TableDef& def) {
  TableState state;
  state.def = def;
  tables_.emplace(def.name, std::move(state));
}

void Catalog::apply_insert(const std::string& table, const Rid& rid,
                           Row values, const std::string& ts, SnapshotId s) {
  auto it = tables_.find(table);
  if (it == tables_.end())
    fail(ErrorKind::Integrity, "log_corrupt", "insert into unknown table");
  RecordVersion v;
  v.values = std::move(values);
  v.rct = ts;
  v.rmt = ts;
  v.from = s;
  it->second.records[rid].push_back(std::move(v));
  rid_table_[rid] = table;
}

void Catalog::apply_update(const std::string& table, const Rid& rid,
                           const Row& patch, const std::string& ts,
                           SnapshotId s) {
  auto it = tables_.find(table);
  if (it == tables_.end())
    fail(ErrorKind::Integrity, "log_corrupt", "update of unknown table");
  auto rit = it->second.records.find(rid);
  if (rit == it->second.records.end() || rit->second.empty())
    fail(ErrorKind::Integrity, "log_corrupt", "update of unknown rid");
  RecordVersion next = rit->second.back();
  rit->second.back().to = s;
  for (const auto& [k, v] : patch) next.values[k] = v;
  next.rmt = ts;
  next.from = s;
  next.to = kOpenSnapshot;
  rit->second.push_back(std::move(next));
}

void Catalog::apply_delete(const std::string& table, const Rid& rid,
                           SnapshotId s) {
  auto it = tables_.find(table);
  if (it == tables_.end())
    fail(ErrorKind::Integrity, "log_corrupt", "delete from unknown table");
  auto rit = it->second.records.find(rid);
  if (rit == it->second.records.end() || rit->second.empty())
    fail(ErrorKind::Integrity, "log_corrupt", "delete of unknown rid");
  rit->second.back().to = s;
}

// ---- lookups ----

const Catalog::TableState* Catalog::find_table(const std::string& name) const {
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : &it->second;
}

const RecordVersion* Catalog::live_version(const std::string& table,
                                           const Rid& rid,
                                           SnapshotId s) const {
  const TableState* state = find_table(table);
  if (!state) return nullptr;
  auto rit = state->records.find(rid);
  if (rit == state->records.end()) return nullptr;
  for (auto it = rit->second.rbegin(); it != rit->second.rend(); ++it)
    if (it->live_at(s)) return &*it;
  return nullptr;
}

// ---- validation ----

void Catalog::check_reference(const ColumnDef& col, const std::string& rid,
                              SnapshotId pending) const {
  if (!looks_like_rid(rid))
    fail(ErrorKind::Validation, "bad_rid",
         "column " + col.name + ": not a RID: " + rid);
  std::string target;
  if (col.kind == ValueKind::RidAny) {
    auto it = rid_table_.find(rid);
    if (it == rid_table_.end())
      fail(ErrorKind::DanglingReference, "dangling_reference",
           "column " + col.name + ": unknown RID " + rid);
    target = it->second;
  } else {
    target = col.ref_target;
  }
  if (!live_version(target, rid, pending))
    fail(ErrorKind::DanglingReference, "dangling_reference",
         "column " + col.name + ": RID " + rid + " is not live in " + target);
}

void Catalog::validate_row(const TableDef& def, const Row& row, bool partial,
                           SnapshotId pending, Row* normalized) const {
  for (const auto& [name, value] : row) {
    if (reserved_column(name))
      fail(ErrorKind::Validation, "reserved_column",
           "system column " + name + " is catalog-managed");
    const ColumnDef* col = def.find_column(name);
    if (!col)
      fail(ErrorKind::Validation, "unknown_column",
           "table " + def.name + " has no column " + name);
    if (value.is_null()) {
      if (!col->nullable)
        fail(ErrorKind::Validation, "null_violation",
             "column " + name + " is not nullable");
      (*normalized)[name] = value;
      continue;
    }
    Value v = value;
    switch (col->kind) {
      case ValueKind::Text:
        if (!v.is_text())
          fail(ErrorKind::Validation, "type_mismatch",
               "column " + name + " expects text");
        break;
      case ValueKind::Integer:
        if (!v.is_integer())
          fail(ErrorKind::Validation, "type_mismatch",
               "column " + name + " expects an integer");
        break;
      case ValueKind::Float:
        if (v.is_integer()) v = Value::real(static_cast<double>(v.as_integer()));
        else if (!v.is_real())
          fail(ErrorKind::Validation, "type_mismatch",
               "column " + name + " expects a float");
        break;
      case ValueKind::Boolean:
        if (!v.is_boolean())
          fail(ErrorKind::Validation, "type_mismatch",
               "column " + name + " expects a boolean");
        break;
      case ValueKind::Timestamp:
        if (!v.is_text() || !looks_like_timestamp(v.as_text()))
          fail(ErrorKind::Validation, "type_mismatch",
               "column " + name + " expects a timestamp");
        break;
      case ValueKind::TermRef:
      case ValueKind::RidRef:
      case ValueKind::AssetRef:
      case ValueKind::RidAny:
        if (!v.is_text())
          fail(ErrorKind::Validation, "type_mismatch",
               "column " + name + " expects a RID");
        check_reference(*col, v.as_text(), pending);
        break;
    }
    (*normalized)[name] = v;
  }
  if (!partial) {
    for (const auto& col : def.columns) {
      if (col.nullable) continue;
      auto it = row.find(col.name);
      if (it == row.end() || it->second.is_null())
        fail(ErrorKind::Validation, "null_violation",
             "column " + col.name + " is not nullable");
    }
  }
}

// ---- public reads ----

TableDef Catalog::table_def(const std::string& name,
                            std::optional<SnapshotId> as_of) const {
  auto body = [&]() -> TableDef {
    SnapshotId s = as_of.value_or(read_horizon());
    const TableState* state = find_table(name);
    if (!state || state->def.valid_from > s)
      fail(ErrorKind::NotFound, "table_not_found", "no such table: " + name);
    return state->def;
  };
  if (this_thread_is_writer()) return body();
  std::shared_lock lk(mu_);
  return body();
}

bool Catalog::has_table(const std::string& name,
                        std::optional<SnapshotId> as_of) const {
  auto body = [&]() -> bool {
    SnapshotId s = as_of.value_or(read_horizon());
    const TableState* state = find_table(name);
    return state && state->def.valid_from <= s;
  };
  if (this_thread_is_writer()) return body();
  std::shared_lock lk(mu_);
  return body();
}

std::vector<TableDef> Catalog::list_tables(
    std::optional<SnapshotId> as_of) const {
  auto body = [&]() -> std::vector<TableDef> {
    SnapshotId s = as_of.value_or(read_horizon());
    std::vector<TableDef> out;
    for (const auto& [name, state] : tables_)
      if (state.def.valid_from <= s) out.push_back(state.def);
    return out;
  };
  if (this_thread_is_writer()) return body();
  std::shared_lock lk(mu_);
  return body();
}

std::vector<Entity> Catalog::query_entities(const std::string& table,
                                            const Filter& filter,
                                            std::optional<SnapshotId> as_of)
    const {
  auto body = [&]() -> std::vector<Entity> {
    SnapshotId horizon = read_horizon();
    SnapshotId s = as_of.value_or(horizon);
    if (s > horizon)
      fail(ErrorKind::Validation, "future_snapshot",
           "snapshot " + std::to_string(s) + " has not been committed");
    const TableState* state = find_table(table);
    if (!state || state->def.valid_from > s)
      fail(ErrorKind::NotFound, "table_not_found", "no such table: " + table);
    for (const auto& [col, v] : filter.eq) {
      (void)v;
      if (!state->def.find_column(col) && !reserved_column(col))
        fail(ErrorKind::NotFound, "column_not_found",
             "table " + table + " has no column " + col);
    }
    std::vector<Entity> out;
    for (const auto& [rid, versions] : state->records) {
      const RecordVersion* live = nullptr;
      for (auto it = versions.rbegin(); it != versions.rend(); ++it)
        if (it->live_at(s)) {
          live = &*it;
          break;
        }
      if (!live) continue;
      bool match = true;
      for (const auto& [col, v] : filter.eq) {
        if (col == "RID") {
          if (Value::text(rid) != v) match = false;
        } else if (col == "RCT") {
          if (Value::text(live->rct) != v) match = false;
        } else if (col == "RMT") {
          if (Value::text(live->rmt) != v) match = false;
        } else {
          auto vit = live->values.find(col);
          Value actual = vit == live->values.end() ? Value::null() : vit->second;
          if (!(actual == v)) match = false;
        }
        if (!match) break;
      }
      if (!match) continue;
      Entity e;
      e.rid = rid;
      e.rct = live->rct;
      e.rmt = live->rmt;
      e.values = live->values;
      out.push_back(std::move(e));
    }
    return out;
  };
  if (this_thread_is_writer()) return body();
  std::shared_lock lk(mu_);
  return body();
}

std::optional<Entity> Catalog::get_entity(const std::string& table,
                                          const Rid& rid,
                                          std::optional<SnapshotId> as_of)
    const {
  auto rows = query_entities(table, Filter{}.where("RID", Value::text(rid)),
                             as_of);
  if (rows.empty()) return std::nullopt;
  return rows.front();
}

std::optional<std::string> Catalog::table_of(const Rid& rid) const {
  auto body = [&]() -> std::optional<std::string> {
    auto it = rid_table_.find(rid);
    if (it == rid_table_.end()) return std::nullopt;
    return it->second;
  };
  if (this_thread_is_writer()) return body();
  std::shared_lock lk(mu_);
  return body();
}

// ---- public writes ----

std::string Catalog::define_table(const TableSpec& spec) {
  auto txn = begin();
  std::string name = txn->define_table(spec);
  txn->commit();
  return name;
}

std::vector<Rid> Catalog::insert_entities(const std::string& table,
                                          const std::vector<Row>& rows) {
  auto txn = begin();
  auto rids = txn->insert(table, rows);
  txn->commit();
  return rids;
}

SnapshotId Catalog::update_entities(
    const std::string& table, const std::vector<std::pair<Rid, Row>>& updates) {
  auto txn = begin();
  for (const auto& [rid, patch] : updates) txn->update(table, rid, patch);
  return txn->commit();
}

SnapshotId Catalog::delete_entities(const std::string& table,
                                    const std::vector<Rid>& rids) {
  auto txn = begin();
  txn->erase(table, rids);
  return txn->commit();
}

// ---- transaction ----

std::unique_ptr<Transaction> Catalog::begin() {
  return std::unique_ptr<Transaction>(new Transaction(*this));
}

Transaction::Transaction(Catalog& catalog)
    : cat_(catalog), lock_(catalog.mu_) {
  // Writer order: in-process lock first, then the cross-process file lock.
  file_lock_ = std::make_unique<FileLock>(cat_.log_.lock_path());
  std::string news = cat_.log_.read_new();
  if (!news.empty()) cat_.replay_locked(news, /*tolerate_torn_tail=*/false);
  pending_ = cat_.any_commit_ ? cat_.snapshot_ + 1 : 0;
  time_ = cat_.now();
  cat_.writer_thread_.store(std::this_thread::get_id(),
                            std::memory_order_release);
  cat_.writer_active_.store(true, std::memory_order_release);
  open_ = true;
}

Transaction::~Transaction() {
  if (open_) abort();
}

void Transaction::require_open() const {
  if (!open_)
    fail(ErrorKind::Precondition, "transaction_closed",
         "transaction already committed or aborted");
}

void Transaction::push_op(const std::string& op_json) {
  if (!ops_json_.empty()) ops_json_.push_back(',');
  ops_json_ += op_json;
}

std::string Transaction::define_table(const TableSpec& spec, TableRole role,
                                      const std::string& vocab_prefix) {
  require_open();
  if (!valid_identifier(spec.name))
    fail(ErrorKind::Validation, "bad_table_name",
         "table name must match [A-Za-z][A-Za-z0-9_]*: " + spec.name);
  if (cat_.tables_.count(spec.name))
    fail(ErrorKind::Duplicate, "duplicate_table",
         "table already exists: " + spec.name);

  TableDef def;
  def.name = spec.name;
  def.schema_kind = spec.schema_kind;
  def.role = role;
  def.vocab_prefix = vocab_prefix;
  def.columns = spec.columns;
  def.valid_from = pending_;

  std::vector<std::string> seen;
  for (const auto& col : def.columns) {
    if (!valid_identifier(col.name))
      fail(ErrorKind::Validation, "bad_column_name",
           "column name must match [A-Za-z][A-Za-z0-9_]*: " + col.name);
    if (reserved_column(col.name))
      fail(ErrorKind::Validation, "reserved_column",
           "column name is reserved: " + col.name);
    if (std::find(seen.begin(), seen.end(), col.name) != seen.end())
      fail(ErrorKind::Duplicate, "duplicate_column",
           "duplicate column: " + col.name);
    seen.push_back(col.name);
    if (col.kind == ValueKind::RidAny) {
      if (!col.ref_target.empty())
        fail(ErrorKind::Validation, "bad_reference",
             "rid_any columns take no target table");
      continue;
    }
    if (!is_reference_kind(col.kind)) continue;
    const bool self_ref = col.ref_target == def.name;
    const Catalog::TableState* target =
        self_ref ? nullptr : cat_.find_table(col.ref_target);
    if (!self_ref && !target)
      fail(ErrorKind::DanglingReference, "dangling_reference",
           "column " + col.name + " references unknown table " +
               col.ref_target);
    if (col.kind == ValueKind::TermRef) {
      if (self_ref || target->def.role != TableRole::Vocabulary)
        fail(ErrorKind::DanglingReference, "dangling_reference",
             "column " + col.name + ": " + col.ref_target +
                 " is not a vocabulary");
    }
    if (col.kind == ValueKind::AssetRef) {
      if (self_ref || target->def.role != TableRole::Asset)
        fail(ErrorKind::DanglingReference, "dangling_reference",
             "column " + col.name + ": " + col.ref_target +
                 " is not an asset table");
    }
  }

  cat_.apply_table(def);
  undo_.push_back({Undo::Table, def.name, {}});
  push_op(json{{"op", "table"}, {"def", tabledef_to_json(def)}}.dump());
  return def.name;
}

std::vector<Rid> Transaction::insert(const std::string& table,
                                     const std::vector<Row>& rows) {
  require_open();
  const Catalog::TableState* state = cat_.find_table(table);
  if (!state)
    fail(ErrorKind::NotFound, "table_not_found", "no such table: " + table);
  // Validate the whole batch before assigning any RID.
  std::vector<Row> normalized(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    cat_.validate_row(state->def, rows[i], /*partial=*/false, pending_,
                      &normalized[i]);
  std::vector<Rid> rids;
  rids.reserve(rows.size());
  for (auto& row : normalized) {
    Rid rid = format_rid(cat_.rid_prefix_, ++cat_.rid_counter_);
    cat_.apply_insert(table, rid, row, time_, pending_);
    undo_.push_back({Undo::Insert, table, rid});
    push_op(json{{"op", "ins"}, {"t", table}, {"r", rid},
                 {"v", row_to_json(row)}}
                .dump());
    rids.push_back(std::move(rid));
  }
  return rids;
}

void Transaction::update(const std::string& table, const Rid& rid,
                         const Row& patch) {
  require_open();
  const Catalog::TableState* state = cat_.find_table(table);
  if (!state)
    fail(ErrorKind::NotFound, "table_not_found", "no such table: " + table);
  if (!cat_.live_version(table, rid, pending_))
    fail(ErrorKind::NotFound, "record_not_found",
         "no live record " + rid + " in " + table);
  Row normalized;
  cat_.validate_row(state->def, patch, /*partial=*/true, pending_,
                    &normalized);
  cat_.apply_update(table, rid, normalized, time_, pending_);
  undo_.push_back({Undo::Update, table, rid});
  push_op(json{{"op", "upd"}, {"t", table}, {"r", rid},
               {"v", row_to_json(normalized)}}
              .dump());
}

void Transaction::erase(const std::string& table, const std::vector<Rid>& rids) {
  require_open();
  const Catalog::TableState* state = cat_.find_table(table);
  if (!state)
    fail(ErrorKind::NotFound, "table_not_found", "no such table: " + table);
  for (const auto& rid : rids) {
    if (!cat_.live_version(table, rid, pending_))
      fail(ErrorKind::NotFound, "record_not_found",
           "no live record " + rid + " in " + table);
    cat_.apply_delete(table, rid, pending_);
    undo_.push_back({Undo::Delete, table, rid});
    push_op(json{{"op", "del"}, {"t", table}, {"r", rid}}.dump());
  }
  // Inbound-reference scan over what remains live at the pending snapshot.
  std::set<Rid> deleted(rids.begin(), rids.end());
  for (const auto& [tname, tstate] : cat_.tables_) {
    std::vector<const ColumnDef*> ref_cols;
    for (const auto& col : tstate.def.columns)
      if (is_reference_kind(col.kind)) ref_cols.push_back(&col);
    if (ref_cols.empty()) continue;
    for (const auto& [rrid, versions] : tstate.records) {
      const RecordVersion* live = nullptr;
      for (auto it = versions.rbegin(); it != versions.rend(); ++it)
        if (it->live_at(pending_)) {
          live = &*it;
          break;
        }
      if (!live) continue;
      for (const ColumnDef* col : ref_cols) {
        auto vit = live->values.find(col->name);
        if (vit == live->values.end() || vit->second.is_null()) continue;
        if (deleted.count(vit->second.as_text()))
          fail(ErrorKind::InboundReference, "inbound_reference",
               "record " + vit->second.as_text() + " is referenced by " +
                   tname + "." + col->name + " (row " + rrid + ")");
      }
    }
  }
}

SnapshotId Transaction::commit() {
  require_open();
  json rec = {{"s", pending_}, {"t", time_}, {"c", cat_.rid_counter_}};
  std::string line = rec.dump();
  // splice the pre-serialized ops array in
  line.pop_back(); // '}'
  line += ",\"ops\":[" + ops_json_ + "]}\n";
  cat_.log_.append(line);
  cat_.snapshot_ = pending_;
  cat_.any_commit_ = true;
  open_ = false;
  cat_.writer_active_.store(false, std::memory_order_release);
  file_lock_.reset();
  return pending_;
}

void Transaction::abort() {
  if (!open_) return;
  for (auto it = undo_.rbegin(); it != undo_.rend(); ++it) {
    switch (it->kind) {
      case Undo::Table:
        cat_.tables_.erase(it->table);
        break;
      case Undo::Insert: {
        auto& recs = cat_.tables_.at(it->table).records;
        auto rit = recs.find(it->rid);
        rit->second.pop_back();
        if (rit->second.empty()) recs.erase(rit);
        cat_.rid_table_.erase(it->rid);
        break;
      }
      case Undo::Update: {
        auto& versions = cat_.tables_.at(it->table).records.at(it->rid);
        versions.pop_back();
        versions.back().to = kOpenSnapshot;
        break;
      }
      case Undo::Delete: {
        auto& versions = cat_.tables_.at(it->table).records.at(it->rid);
        versions.back().to = kOpenSnapshot;
        break;
      }
    }
  }
  undo_.clear();
  open_ = false;
  cat_.writer_active_.store(false, std::memory_order_release);
  file_lock_.reset();
}

} // namespace deriva
