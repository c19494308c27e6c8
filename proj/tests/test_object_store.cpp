#include "doctest.h"

#include <fstream>
#include <random>

#include "deriva/digest.hpp"
#include "deriva/object_store.hpp"
#include "support/temp_dir.hpp"

using namespace deriva;
using deriva::test::TempDir;

TEST_CASE("empty object has the canonical empty-input digest") {
  TempDir dir;
  ObjectStore store(dir.path());
  auto obj = store.put("/scratch/empty.bin", "");
  CHECK(obj.checksum ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(obj.length == 0);
}

TEST_CASE("identical content re-PUT returns the existing version") {
  TempDir dir;
  ObjectStore store(dir.path());
  auto a = store.put("/m/model.bin", "weights");
  auto b = store.put("/m/model.bin", "weights");
  CHECK(a.version_id == b.version_id);
  CHECK(store.head("/m/model.bin").version_id == a.version_id);

  auto c = store.put("/m/model.bin", "weights-v2");
  CHECK(c.version_id != a.version_id);
  // Newest wins by default; old versions stay addressable.
  CHECK(store.head("/m/model.bin").version_id == c.version_id);
  CHECK(store.get("/m/model.bin", a.version_id).first == "weights");
}

TEST_CASE("declared checksum must match content") {
  TempDir dir;
  ObjectStore store(dir.path());
  try {
    store.put("/m/x.bin", "abc", std::string(64, '0'));
    FAIL("expected checksum mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Integrity);
  }
  CHECK_FALSE(store.exists("/m/x.bin"));

  // Correct declared digest (and md5) succeeds.
  auto obj = store.put("/m/x.bin", "abc", sha256_hex("abc"),
                       "text/plain", md5_hex("abc"));
  CHECK(obj.content_type == "text/plain");
}

TEST_CASE("namespace conflicts are rejected") {
  TempDir dir;
  ObjectStore store(dir.path());
  store.put("/a/b/c.txt", "x");
  CHECK_THROWS_AS(store.put("/a/b", "y"), Error);          // path is a namespace
  CHECK_THROWS_AS(store.put("/a/b/c.txt/d", "y"), Error);  // object mid-path
  CHECK_THROWS_AS(store.put("bad", "y"), Error);
  CHECK_THROWS_AS(store.put("/a//b", "y"), Error);
  CHECK_THROWS_AS(store.put("/a/../b", "y"), Error);
}

TEST_CASE("round-trip property on random payloads") {
  TempDir dir;
  ObjectStore store(dir.path());
  std::mt19937 rng(99);
  for (int i = 0; i < 12; ++i) {
    std::size_t size = static_cast<std::size_t>(rng() % (1 << 20));
    std::string payload(size, '\0');
    for (auto& c : payload) c = static_cast<char>(rng() & 0xff);
    std::string path = "/rt/obj" + std::to_string(i);
    auto put = store.put(path, payload);
    auto [bytes, got] = store.get(path);
    CHECK(bytes == payload);
    CHECK(got.checksum == put.checksum);
    CHECK(got.length == payload.size());
  }
}

TEST_CASE("tampering with a stored blob is detected on read") {
  TempDir dir;
  ObjectStore store(dir.path());
  auto obj = store.put("/t/victim.bin", "sensitive bytes");

  auto blob = store.blob_path(obj.checksum);
  auto bytes = read_file(blob);
  bytes[bytes.size() / 2] ^= 0x01;
  write_file_atomic(blob, bytes);

  try {
    store.get("/t/victim.bin");
    FAIL("expected integrity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Integrity);
  }
  // head (metadata only) still works; the corruption is surfaced, not hidden.
  CHECK(store.head("/t/victim.bin").checksum == obj.checksum);
}

TEST_CASE("namespace listing and missing objects") {
  TempDir dir;
  ObjectStore store(dir.path());
  store.put("/assets/Model/a.bin", "1");
  store.put("/assets/Model/b.bin", "2");
  store.put("/assets/Other/c.bin", "3");

  auto models = store.list("/assets/Model");
  CHECK(models == std::vector<std::string>{"/assets/Model/a.bin",
                                           "/assets/Model/b.bin"});
  CHECK(store.list("/assets").size() == 3);
  CHECK(store.list("/assets/Mod").empty()); // segment-aware, not substring

  CHECK_THROWS_AS(store.get("/assets/Model/missing.bin"), Error);
  CHECK_THROWS_AS(store.get("/assets/Model/a.bin", "no-such-version"), Error);
}

TEST_CASE("index survives reopen and is shared between instances") {
  TempDir dir;
  std::string version;
  {
    ObjectStore store(dir.path());
    version = store.put("/p/x.bin", "hello").version_id;
  }
  ObjectStore store(dir.path());
  CHECK(store.get("/p/x.bin").first == "hello");

  ObjectStore other(dir.path());
  other.put("/p/y.bin", "world");
  store.refresh();
  CHECK(store.exists("/p/y.bin"));
}
