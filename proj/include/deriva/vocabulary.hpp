#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deriva/catalog.hpp"

namespace deriva {

struct VocabularyTerm {
  Rid rid;
  std::string vocabulary;
  std::string name;
  std::vector<std::string> synonyms;
  std::string description;
  std::string curie;
  bool deprecated = false;
};

// Controlled vocabularies: one catalog table per vocabulary, terms as rows.
// Within a vocabulary the union of names and synonyms is duplicate-free
// (case-sensitive), so lookup by either is unambiguous. Terms are never
// hard-deleted, only deprecated, keeping historical term_refs resolvable.
class Vocabularies {
public:
  explicit Vocabularies(Catalog& catalog) : cat_(catalog) {}

  std::string create(const std::string& name, const std::string& curie_prefix);

  VocabularyTerm add_term(const std::string& vocabulary,
                          const std::string& name,
                          const std::vector<std::string>& synonyms = {},
                          const std::string& description = {},
                          bool exist_ok = false,
                          const std::string& curie = {});

  // Same, staged into an open transaction (used by modules that bundle term
  // creation with other writes).
  VocabularyTerm add_term_in(Transaction& txn, const std::string& vocabulary,
                             const std::string& name,
                             const std::vector<std::string>& synonyms = {},
                             const std::string& description = {},
                             bool exist_ok = false,
                             const std::string& curie = {});

  // Term whose name or any synonym equals `text`.
  VocabularyTerm lookup(const std::string& vocabulary,
                        const std::string& text) const;
  std::optional<VocabularyTerm> try_lookup(const std::string& vocabulary,
                                           const std::string& text) const;

  // Resolves either a term RID or a term name/synonym to the term.
  VocabularyTerm resolve(const std::string& vocabulary,
                         const std::string& rid_or_text) const;

  std::vector<std::string> list() const; // vocabulary names, creation order
  std::vector<VocabularyTerm> terms(const std::string& vocabulary) const;

  void deprecate(const std::string& vocabulary, const std::string& name);

  bool is_vocabulary(const std::string& table) const;

private:
  Catalog& cat_;

  TableDef require_vocabulary(const std::string& name) const;
};

VocabularyTerm term_from_entity(const std::string& vocabulary,
                                const Entity& entity);

} // namespace deriva
