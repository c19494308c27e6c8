#include "doctest.h"

#include "deriva/vocabulary.hpp"
#include "support/temp_dir.hpp"

using namespace deriva;
using deriva::test::TempDir;

TEST_CASE("vocabulary creation and listing") {
  TempDir dir;
  auto cat = Catalog::open(dir.path());
  Vocabularies vocab(*cat);

  CHECK(vocab.list().size() == 6);
  vocab.create("Image_Quality", "IQ");
  auto names = vocab.list();
  CHECK(names.size() == 7);
  CHECK(names.back() == "Image_Quality"); // creation order
  CHECK(vocab.terms("Image_Quality").empty());

  SUBCASE("duplicate vocabulary name") {
    CHECK_THROWS_AS(vocab.create("Image_Quality", "IQ2"), Error);
  }
  SUBCASE("duplicate prefix") {
    try {
      vocab.create("Other_Quality", "IQ");
      FAIL("expected duplicate prefix error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Duplicate);
    }
  }
  SUBCASE("bad prefix") {
    CHECK_THROWS_AS(vocab.create("X_Terms", "9bad"), Error);
  }
}

TEST_CASE("terms: curie counters, synonyms, collisions") {
  TempDir dir;
  auto cat = Catalog::open(dir.path());
  Vocabularies vocab(*cat);
  vocab.create("Image_Quality", "IQ");

  auto good = vocab.add_term("Image_Quality", "Good", {"OK"});
  auto bad = vocab.add_term("Image_Quality", "Bad");
  CHECK(good.curie == "IQ:1");
  CHECK(bad.curie == "IQ:2");

  SUBCASE("synonym collides with later term name") {
    try {
      vocab.add_term("Image_Quality", "OK");
      FAIL("expected collision");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Duplicate);
      CHECK(std::string(e.what()).find("Good") != std::string::npos);
    }
  }
  SUBCASE("lookup by name or synonym") {
    CHECK(vocab.lookup("Image_Quality", "Good").rid == good.rid);
    CHECK(vocab.lookup("Image_Quality", "OK").rid == good.rid);
    CHECK_THROWS_AS(vocab.lookup("Image_Quality", "Excellent"), Error);
    CHECK_THROWS_AS(vocab.lookup("No_Such_Vocab", "x"), Error);
  }
  SUBCASE("case sensitivity") {
    auto ok = vocab.add_term("Image_Quality", "good");
    CHECK(ok.curie == "IQ:3");
  }
  SUBCASE("terms listing is RID-ordered") {
    auto terms = vocab.terms("Image_Quality");
    REQUIRE(terms.size() == 2);
    CHECK(terms[0].name == "Good");
    CHECK(terms[1].name == "Bad");
  }
}

TEST_CASE("builtin asset roles behave as existing terms") {
  TempDir dir;
  auto cat = Catalog::open(dir.path());
  Vocabularies vocab(*cat);

  // input/output are bootstrapped; exist_ok returns them instead of failing.
  auto input = vocab.add_term("Asset_Role", "input", {}, "", /*exist_ok=*/true);
  auto output = vocab.add_term("Asset_Role", "output", {}, "", true);
  CHECK(input.curie == "ROL:1");
  CHECK(output.curie == "ROL:2");
  CHECK(vocab.terms("Asset_Role").size() == 2);

  CHECK_THROWS_AS(vocab.add_term("Asset_Role", "input"), Error);
}

TEST_CASE("deprecated terms stay resolvable") {
  TempDir dir;
  auto cat = Catalog::open(dir.path());
  Vocabularies vocab(*cat);
  vocab.create("Stage", "STG");
  vocab.add_term("Stage", "pilot");
  vocab.deprecate("Stage", "pilot");

  auto term = vocab.lookup("Stage", "pilot");
  CHECK(term.deprecated);
  // Name stays reserved: no reuse after deprecation.
  CHECK_THROWS_AS(vocab.add_term("Stage", "pilot"), Error);
}

TEST_CASE("every stored term_ref resolves to a live term") {
  TempDir dir;
  auto cat = Catalog::open(dir.path());
  Vocabularies vocab(*cat);

  // Spot-check the property on the builtin data plus a user table.
  vocab.create("Color", "COL");
  auto red = vocab.add_term("Color", "red");
  TableSpec spec;
  spec.name = "Marker";
  spec.columns = {{"Color", ValueKind::TermRef, "Color", false}};
  cat->define_table(spec);
  cat->insert_entities("Marker", {{{"Color", Value::text(red.rid)}}});

  for (const auto& def : cat->list_tables()) {
    for (const auto& col : def.columns) {
      if (col.kind != ValueKind::TermRef) continue;
      for (const auto& row : cat->query_entities(def.name)) {
        const Value& v = row.value(col.name);
        if (v.is_null()) continue;
        CHECK(cat->get_entity(col.ref_target, v.as_text()).has_value());
      }
    }
  }

  // The referenced term cannot be deleted out from under the marker.
  CHECK_THROWS_AS(cat->delete_entities("Color", {red.rid}), Error);
}
