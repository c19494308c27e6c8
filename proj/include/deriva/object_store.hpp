#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "deriva/fsutil.hpp"
#include "deriva/types.hpp"

namespace deriva {

struct StoredObject {
  std::string path;       // hierarchical namespace, "/ns/.../name"
  std::string version_id; // opaque token, stable for identical content
  std::string checksum;   // SHA-256, lowercase hex
  std::uint64_t length = 0;
  std::string content_type;
  std::string created;
};

// Content-verified, versioned object store. Blobs are content-addressed
// under <root>/objects/sha256/<aa>/<rest> (re-PUT of identical bytes is free
// dedupe); the path -> version list index is an append-only log shared
// across processes. Every read re-digests the blob, so corruption surfaces
// as an integrity error, never as silent bad bytes.
class ObjectStore {
public:
  explicit ObjectStore(fs::path root);

  StoredObject put(const std::string& path, std::string_view bytes,
                   const std::string& declared_sha256 = {},
                   const std::string& content_type = "application/octet-stream",
                   const std::string& declared_md5 = {});

  // Newest version by default. The returned bytes always match the stored
  // checksum.
  std::pair<std::string, StoredObject> get(
      const std::string& path, const std::string& version_id = {}) const;

  StoredObject head(const std::string& path,
                    const std::string& version_id = {}) const;

  bool exists(const std::string& path) const;

  // Paths under a namespace prefix, sorted.
  std::vector<std::string> list(const std::string& prefix) const;

  // Re-read index records appended by other processes.
  void refresh();

  const fs::path& root() const { return root_; }
  fs::path blob_path(const std::string& checksum) const;

  static void validate_path(const std::string& path);

private:
  fs::path root_;
  mutable AppendLog index_;
  std::map<std::string, std::vector<StoredObject>> versions_;
  mutable std::shared_mutex mu_;

  void apply_index_records(const std::string& bytes, bool tolerate_torn_tail);
  const StoredObject* find_version(const std::string& path,
                                   const std::string& version_id) const;
};

} // namespace deriva
