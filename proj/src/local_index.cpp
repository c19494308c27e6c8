#include "deriva/local_index.hpp"

#include <sqlite3.h>

#include <algorithm>

#include "deriva/csv.hpp"
#include "deriva/errors.hpp"

namespace deriva {

struct LocalIndex::Handle {
  sqlite3* db = nullptr;
  ~Handle() {
    if (db) sqlite3_close(db);
  }
};

static void exec_sql(sqlite3* db, const std::string& sql) {
  char* errmsg = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &errmsg) != SQLITE_OK) {
    std::string msg = errmsg ? errmsg : "unknown sqlite error";
    sqlite3_free(errmsg);
    fail(ErrorKind::Io, "index_error", "sqlite: " + msg + " in " + sql);
  }
}

static std::string quote_ident(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

LocalIndex::LocalIndex(const fs::path& db_path, bool create)
    : db_(std::make_shared<Handle>()), db_path_(db_path) {
  int flags = SQLITE_OPEN_READWRITE | (create ? SQLITE_OPEN_CREATE : 0);
  if (sqlite3_open_v2(db_path.c_str(), &db_->db, flags, nullptr) != SQLITE_OK)
    fail(ErrorKind::Io, "index_error",
         "cannot open index database " + db_path.string());
}

LocalIndex LocalIndex::build(const fs::path& bag_dir) {
  if (!fs::exists(bag_dir / "_materialized.json"))
    fail(ErrorKind::Precondition, "materialization_incomplete",
         "bag at " + bag_dir.string() + " is not fully materialized");
  fs::path db_path = bag_dir / "index.sqlite";
  std::error_code ec;
  fs::remove(db_path, ec); // rebuildable from scratch

  LocalIndex index(db_path, /*create=*/true);
  sqlite3* db = index.db_->db;
  exec_sql(db, "BEGIN");
  fs::path records = bag_dir / "data" / "records";
  if (fs::exists(records)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(records))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto rows = parse_csv(read_file(file));
      if (rows.empty()) continue;
      std::string table = file.stem().string();
      const auto& header = rows.front();

      std::string create_sql = "CREATE TABLE " + quote_ident(table) + " (";
      std::string insert_sql = "INSERT INTO " + quote_ident(table) + " VALUES (";
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) {
          create_sql += ", ";
          insert_sql += ", ";
        }
        create_sql += quote_ident(header[i]) + " TEXT";
        insert_sql += "?";
      }
      create_sql += ")";
      insert_sql += ")";
      exec_sql(db, create_sql);

      sqlite3_stmt* stmt = nullptr;
      if (sqlite3_prepare_v2(db, insert_sql.c_str(), -1, &stmt, nullptr) !=
          SQLITE_OK)
        fail(ErrorKind::Io, "index_error", "cannot prepare insert for " + table);
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        for (std::size_t c = 0; c < header.size(); ++c) {
          std::string cell = c < row.size() ? row[c] : "";
          sqlite3_bind_text(stmt, static_cast<int>(c + 1), cell.c_str(),
                            static_cast<int>(cell.size()), SQLITE_TRANSIENT);
        }
        if (sqlite3_step(stmt) != SQLITE_DONE) {
          sqlite3_finalize(stmt);
          fail(ErrorKind::Io, "index_error", "insert failed for " + table);
        }
        sqlite3_reset(stmt);
      }
      sqlite3_finalize(stmt);
    }
  }
  exec_sql(db, "COMMIT");
  return index;
}

LocalIndex LocalIndex::open_or_build(const fs::path& bag_dir) {
  fs::path db_path = bag_dir / "index.sqlite";
  if (fs::exists(db_path)) return LocalIndex(db_path, /*create=*/false);
  return build(bag_dir);
}

std::vector<std::string> LocalIndex::tables() const {
  std::vector<std::string> out;
  sqlite3_stmt* stmt = nullptr;
  sqlite3_prepare_v2(db_->db,
                     "SELECT name FROM sqlite_master WHERE type='table' "
                     "ORDER BY name",
                     -1, &stmt, nullptr);
  while (sqlite3_step(stmt) == SQLITE_ROW)
    out.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 0)));
  sqlite3_finalize(stmt);
  return out;
}

void LocalIndex::require_table(const std::string& table) const {
  auto all = tables();
  if (std::find(all.begin(), all.end(), table) == all.end())
    fail(ErrorKind::NotFound, "table_not_in_bag",
         table + " was not exported into this bag");
}

std::vector<std::string> LocalIndex::columns(const std::string& table) const {
  require_table(table);
  std::vector<std::string> out;
  sqlite3_stmt* stmt = nullptr;
  std::string sql = "PRAGMA table_info(" + quote_ident(table) + ")";
  sqlite3_prepare_v2(db_->db, sql.c_str(), -1, &stmt, nullptr);
  while (sqlite3_step(stmt) == SQLITE_ROW)
    out.emplace_back(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 1)));
  sqlite3_finalize(stmt);
  return out;
}

std::size_t LocalIndex::row_count(const std::string& table) const {
  require_table(table);
  sqlite3_stmt* stmt = nullptr;
  std::string sql = "SELECT COUNT(*) FROM " + quote_ident(table);
  sqlite3_prepare_v2(db_->db, sql.c_str(), -1, &stmt, nullptr);
  std::size_t count = 0;
  if (sqlite3_step(stmt) == SQLITE_ROW)
    count = static_cast<std::size_t>(sqlite3_column_int64(stmt, 0));
  sqlite3_finalize(stmt);
  return count;
}

std::vector<std::map<std::string, std::string>> LocalIndex::rows(
    const std::string& table) const {
  auto cols = columns(table);
  std::vector<std::map<std::string, std::string>> out;
  sqlite3_stmt* stmt = nullptr;
  std::string sql = "SELECT * FROM " + quote_ident(table) + " ORDER BY rowid";
  sqlite3_prepare_v2(db_->db, sql.c_str(), -1, &stmt, nullptr);
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    std::map<std::string, std::string> row;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const unsigned char* text =
          sqlite3_column_text(stmt, static_cast<int>(c));
      row[cols[c]] = text ? reinterpret_cast<const char*>(text) : "";
    }
    out.push_back(std::move(row));
  }
  sqlite3_finalize(stmt);
  return out;
}

} // namespace deriva
