#include "deriva/vocabulary.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

#include "deriva/rid.hpp"

namespace deriva {

using nlohmann::json;

static bool valid_prefix(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

VocabularyTerm term_from_entity(const std::string& vocabulary,
                                const Entity& entity) {
  VocabularyTerm term;
  term.rid = entity.rid;
  term.vocabulary = vocabulary;
  term.name = entity.value("Name").as_text();
  term.description = entity.value("Description").is_null()
                         ? std::string{}
                         : entity.value("Description").as_text();
  term.curie = entity.value("CURIE").as_text();
  term.deprecated = entity.value("Deprecated").as_boolean();
  for (const auto& s : json::parse(entity.value("Synonyms").as_text()))
    term.synonyms.push_back(s.get<std::string>());
  return term;
}

TableDef Vocabularies::require_vocabulary(const std::string& name) const {
  if (!cat_.has_table(name))
    fail(ErrorKind::NotFound, "vocabulary_not_found",
         "no such vocabulary: " + name);
  TableDef def = cat_.table_def(name);
  if (def.role != TableRole::Vocabulary)
    fail(ErrorKind::NotFound, "vocabulary_not_found",
         name + " is a table but not a vocabulary");
  return def;
}

bool Vocabularies::is_vocabulary(const std::string& table) const {
  return cat_.has_table(table) &&
         cat_.table_def(table).role == TableRole::Vocabulary;
}

std::string Vocabularies::create(const std::string& name,
                                 const std::string& curie_prefix) {
  if (!valid_prefix(curie_prefix))
    fail(ErrorKind::Validation, "bad_curie_prefix",
         "prefix must match [A-Za-z][A-Za-z0-9_]*: " + curie_prefix);
  for (const auto& def : cat_.list_tables())
    if (def.role == TableRole::Vocabulary && def.vocab_prefix == curie_prefix)
      fail(ErrorKind::Duplicate, "duplicate_curie_prefix",
           "prefix " + curie_prefix + " already used by " + def.name);
  TableSpec spec;
  spec.name = name;
  spec.schema_kind = SchemaKind::Domain;
  spec.columns = vocabulary_columns();
  auto txn = cat_.begin();
  auto table = txn->define_table(spec, TableRole::Vocabulary, curie_prefix);
  txn->commit();
  return table;
}

VocabularyTerm Vocabularies::add_term(const std::string& vocabulary,
                                      const std::string& name,
                                      const std::vector<std::string>& synonyms,
                                      const std::string& description,
                                      bool exist_ok, const std::string& curie) {
  auto txn = cat_.begin();
  auto term = add_term_in(*txn, vocabulary, name, synonyms, description,
                          exist_ok, curie);
  txn->commit();
  return term;
}

VocabularyTerm Vocabularies::add_term_in(
    Transaction& txn, const std::string& vocabulary, const std::string& name,
    const std::vector<std::string>& synonyms, const std::string& description,
    bool exist_ok, const std::string& curie) {
  TableDef def = require_vocabulary(vocabulary);
  if (name.empty())
    fail(ErrorKind::Validation, "bad_term", "term name must be non-empty");

  // Collision scan over the union of existing names and synonyms.
  std::vector<std::string> incoming = synonyms;
  incoming.push_back(name);
  std::uint64_t max_auto = 0;
  const std::string auto_prefix = def.vocab_prefix + ":";
  for (const auto& row : cat_.query_entities(vocabulary)) {
    VocabularyTerm existing = term_from_entity(vocabulary, row);
    if (existing.curie.rfind(auto_prefix, 0) == 0) {
      const char* digits = existing.curie.c_str() + auto_prefix.size();
      char* end = nullptr;
      std::uint64_t n = std::strtoull(digits, &end, 10);
      if (end && *end == '\0') max_auto = std::max(max_auto, n);
    }
    std::vector<std::string> held = existing.synonyms;
    held.push_back(existing.name);
    for (const auto& a : incoming) {
      if (std::find(held.begin(), held.end(), a) == held.end()) continue;
      if (exist_ok && existing.name == name && existing.synonyms == synonyms)
        return existing;
      fail(ErrorKind::Duplicate, "term_collision",
           "\"" + a + "\" collides with term " + existing.name + " (" +
               existing.curie + ") in " + vocabulary);
    }
    if (!curie.empty() && existing.curie == curie)
      fail(ErrorKind::Duplicate, "duplicate_curie",
           "CURIE " + curie + " already assigned in " + vocabulary);
  }
  // Duplicates within the incoming name+synonym set itself.
  for (std::size_t i = 0; i < incoming.size(); ++i)
    for (std::size_t j = i + 1; j < incoming.size(); ++j)
      if (incoming[i] == incoming[j])
        fail(ErrorKind::Duplicate, "term_collision",
             "duplicate name/synonym in request: " + incoming[i]);

  std::string assigned_curie =
      curie.empty() ? auto_prefix + std::to_string(max_auto + 1) : curie;

  json syn = json::array();
  for (const auto& s : synonyms) syn.push_back(s);
  Row row{{"Name", Value::text(name)},
          {"Synonyms", Value::text(syn.dump())},
          {"Description",
           description.empty() ? Value::null() : Value::text(description)},
          {"CURIE", Value::text(assigned_curie)},
          {"Deprecated", Value::boolean(false)}};
  Rid rid = txn.insert(vocabulary, {row}).front();

  VocabularyTerm term;
  term.rid = rid;
  term.vocabulary = vocabulary;
  term.name = name;
  term.synonyms = synonyms;
  term.description = description;
  term.curie = assigned_curie;
  return term;
}

std::optional<VocabularyTerm> Vocabularies::try_lookup(
    const std::string& vocabulary, const std::string& text) const {
  require_vocabulary(vocabulary);
  for (const auto& row : cat_.query_entities(vocabulary)) {
    VocabularyTerm term = term_from_entity(vocabulary, row);
    if (term.name == text) return term;
    if (std::find(term.synonyms.begin(), term.synonyms.end(), text) !=
        term.synonyms.end())
      return term;
  }
  return std::nullopt;
}

VocabularyTerm Vocabularies::lookup(const std::string& vocabulary,
                                    const std::string& text) const {
  auto term = try_lookup(vocabulary, text);
  if (!term)
    fail(ErrorKind::NotFound, "term_not_found",
         "no term \"" + text + "\" in " + vocabulary);
  return *term;
}

VocabularyTerm Vocabularies::resolve(const std::string& vocabulary,
                                     const std::string& rid_or_text) const {
  if (looks_like_rid(rid_or_text)) {
    auto row = cat_.get_entity(vocabulary, rid_or_text);
    if (row) return term_from_entity(vocabulary, *row);
  }
  return lookup(vocabulary, rid_or_text);
}

std::vector<std::string> Vocabularies::list() const {
  std::vector<TableDef> defs;
  for (const auto& def : cat_.list_tables())
    if (def.role == TableRole::Vocabulary) defs.push_back(def);
  std::sort(defs.begin(), defs.end(), [](const TableDef& a, const TableDef& b) {
    return a.valid_from != b.valid_from ? a.valid_from < b.valid_from
                                        : a.name < b.name;
  });
  std::vector<std::string> names;
  for (const auto& def : defs) names.push_back(def.name);
  return names;
}

std::vector<VocabularyTerm> Vocabularies::terms(
    const std::string& vocabulary) const {
  require_vocabulary(vocabulary);
  std::vector<VocabularyTerm> out;
  for (const auto& row : cat_.query_entities(vocabulary))
    out.push_back(term_from_entity(vocabulary, row));
  return out;
}

void Vocabularies::deprecate(const std::string& vocabulary,
                             const std::string& name) {
  auto term = lookup(vocabulary, name);
  cat_.update_entities(vocabulary,
                       {{term.rid, {{"Deprecated", Value::boolean(true)}}}});
}

} // namespace deriva
