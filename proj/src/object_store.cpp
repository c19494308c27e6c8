#include "deriva/object_store.hpp"
#include <cctype>
#include <mutex>

#include <nlohmann/json.hpp>

#include <algorithm>

#include "deriva/clock.hpp"
#include "deriva/digest.hpp"
#include "deriva/errors.hpp"

namespace deriva {

using nlohmann::json;

ObjectStore::ObjectStore(fs::path root) : root_(std::move(root)) {
  ensure_dir(root_ / "objects" / "sha256");
  index_ = AppendLog(root_ / "objects.log");
  FileLock lock(index_.lock_path());
  apply_index_records(index_.read_new(), /*tolerate_torn_tail=*/true);
}

void ObjectStore::validate_path(const std::string& path) {
  if (path.empty() || path[0] != '/')
    fail(ErrorKind::Validation, "bad_object_path",
         "object paths start with '/': " + path);
  if (path.size() < 2 || path.back() == '/')
    fail(ErrorKind::Validation, "bad_object_path",
         "object paths name an object, not a namespace: " + path);
  std::string segment;
  for (std::size_t i = 1; i <= path.size(); ++i) {
    char c = i < path.size() ? path[i] : '/';
    if (c == '/') {
      if (segment.empty() || segment == "." || segment == "..")
        fail(ErrorKind::Validation, "bad_object_path",
             "bad path segment in " + path);
      segment.clear();
      continue;
    }
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
              c == '_' || c == '-';
    if (!ok)
      fail(ErrorKind::Validation, "bad_object_path",
           "unsupported character in object path: " + path);
    segment.push_back(c);
  }
}

fs::path ObjectStore::blob_path(const std::string& checksum) const {
  return root_ / "objects" / "sha256" / checksum.substr(0, 2) /
         checksum.substr(2);
}

void ObjectStore::apply_index_records(const std::string& bytes,
                                      bool tolerate_torn_tail) {
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) {
      if (tolerate_torn_tail) break;
      fail(ErrorKind::Integrity, "store_index_corrupt",
           "object index ends mid-record");
    }
    std::string line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      if (pos >= bytes.size() && tolerate_torn_tail) break;
      fail(ErrorKind::Integrity, "store_index_corrupt",
           "object index record is not valid JSON");
    }
    StoredObject obj;
    obj.path = rec.at("path").get<std::string>();
    obj.version_id = rec.at("v").get<std::string>();
    obj.checksum = rec.at("sum").get<std::string>();
    obj.length = rec.at("len").get<std::uint64_t>();
    obj.content_type = rec.at("ct").get<std::string>();
    obj.created = rec.at("t").get<std::string>();
    versions_[obj.path].push_back(std::move(obj));
  }
}

void ObjectStore::refresh() {
  std::unique_lock lk(mu_);
  FileLock lock(index_.lock_path());
  apply_index_records(index_.read_new(), /*tolerate_torn_tail=*/false);
}

StoredObject ObjectStore::put(const std::string& path, std::string_view bytes,
                              const std::string& declared_sha256,
                              const std::string& content_type,
                              const std::string& declared_md5) {
  validate_path(path);
  std::string checksum = sha256_hex(bytes);
  if (!declared_sha256.empty() && declared_sha256 != checksum)
    fail(ErrorKind::Integrity, "checksum_mismatch",
         "declared sha256 " + declared_sha256 + " does not match content " +
             checksum);
  if (!declared_md5.empty() && declared_md5 != md5_hex(bytes))
    fail(ErrorKind::Integrity, "checksum_mismatch",
         "declared md5 does not match content");

  std::unique_lock lk(mu_);
  FileLock lock(index_.lock_path());
  apply_index_records(index_.read_new(), /*tolerate_torn_tail=*/false);

  // Namespace conflicts: the path may not sit above or below an object.
  std::string as_ns = path + "/";
  for (const auto& [existing, list] : versions_) {
    (void)list;
    if (existing.rfind(as_ns, 0) == 0)
      fail(ErrorKind::Conflict, "namespace_conflict",
           path + " is a namespace holding " + existing);
    if (path.rfind(existing + "/", 0) == 0)
      fail(ErrorKind::Conflict, "namespace_conflict",
           existing + " is an object in the middle of " + path);
  }

  // Dedupe by checksum within the path.
  if (auto it = versions_.find(path); it != versions_.end())
    for (const auto& v : it->second)
      if (v.checksum == checksum) return v;

  fs::path blob = blob_path(checksum);
  if (!fs::exists(blob)) {
    ensure_dir(blob.parent_path());
    write_file_atomic(blob, bytes);
  }

  StoredObject obj;
  obj.path = path;
  obj.version_id = checksum.substr(0, 16);
  obj.checksum = checksum;
  obj.length = bytes.size();
  obj.content_type = content_type;
  obj.created = now_timestamp();

  json rec = {{"path", obj.path}, {"v", obj.version_id},
              {"sum", obj.checksum}, {"len", obj.length},
              {"ct", obj.content_type}, {"t", obj.created}};
  index_.append(rec.dump() + "\n");
  versions_[path].push_back(obj);
  return obj;
}

const StoredObject* ObjectStore::find_version(
    const std::string& path, const std::string& version_id) const {
  auto it = versions_.find(path);
  if (it == versions_.end() || it->second.empty()) return nullptr;
  if (version_id.empty()) return &it->second.back();
  for (const auto& v : it->second)
    if (v.version_id == version_id) return &v;
  return nullptr;
}

StoredObject ObjectStore::head(const std::string& path,
                               const std::string& version_id) const {
  std::shared_lock lk(mu_);
  const StoredObject* obj = find_version(path, version_id);
  if (!obj)
    fail(ErrorKind::NotFound, "object_not_found",
         "no object at " + path +
             (version_id.empty() ? "" : ":" + version_id));
  return *obj;
}

std::pair<std::string, StoredObject> ObjectStore::get(
    const std::string& path, const std::string& version_id) const {
  StoredObject obj = head(path, version_id);
  std::string bytes = read_file(blob_path(obj.checksum));
  if (sha256_hex(bytes) != obj.checksum)
    fail(ErrorKind::Integrity, "object_corrupt",
         "stored bytes for " + path + " do not match checksum " +
             obj.checksum);
  if (bytes.size() != obj.length)
    fail(ErrorKind::Integrity, "object_corrupt",
         "stored length for " + path + " does not match");
  return {std::move(bytes), std::move(obj)};
}

bool ObjectStore::exists(const std::string& path) const {
  std::shared_lock lk(mu_);
  return find_version(path, {}) != nullptr;
}

std::vector<std::string> ObjectStore::list(const std::string& prefix) const {
  std::shared_lock lk(mu_);
  std::string ns = prefix;
  while (!ns.empty() && ns.back() == '/') ns.pop_back();
  std::vector<std::string> out;
  for (const auto& [path, list] : versions_) {
    if (list.empty()) continue;
    if (path == ns || ns.empty() || path.rfind(ns + "/", 0) == 0)
      out.push_back(path);
  }
  return out;
}

} // namespace deriva
