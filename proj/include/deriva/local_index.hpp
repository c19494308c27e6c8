#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "deriva/fsutil.hpp"

namespace deriva {

// SQLite index over a materialized bag's exported tables: one database file
// (index.sqlite) at the bag root, outside data/ and outside the integrity
// envelope, rebuildable at any time from the CSVs.
class LocalIndex {
public:
  // Parses every data/records/*.csv into the index. Requires a completed
  // materialization (the completion marker must be present).
  static LocalIndex build(const fs::path& bag_dir);

  // Reuses an existing index file when present, else builds one.
  static LocalIndex open_or_build(const fs::path& bag_dir);

  std::vector<std::string> tables() const;
  std::vector<std::string> columns(const std::string& table) const;
  std::size_t row_count(const std::string& table) const;

  // Rows in file order, cells as exported strings.
  std::vector<std::map<std::string, std::string>> rows(
      const std::string& table) const;

  const fs::path& db_path() const { return db_path_; }

private:
  struct Handle;
  std::shared_ptr<Handle> db_;
  fs::path db_path_;

  explicit LocalIndex(const fs::path& db_path, bool create);
  void require_table(const std::string& table) const;
};

} // namespace deriva
