#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deriva/errors.hpp"

namespace deriva {

using SnapshotId = std::uint64_t;
using Rid = std::string;

// valid_to for a record version that is still live.
inline constexpr SnapshotId kOpenSnapshot = ~SnapshotId{0};

// Column value kinds. Text-shaped kinds (Text, Timestamp and the reference
// kinds) all carry strings; the kind drives validation and rendering.
enum class ValueKind {
  Text,
  Integer,
  Float,
  Boolean,
  Timestamp,
  TermRef,  // RID of a term in a named vocabulary table
  RidRef,   // RID of a row in a named table
  AssetRef, // RID of a row in a named asset table
  RidAny,   // RID of a row in any table (catalog-wide link columns)
};

const char* to_string(ValueKind kind);
ValueKind value_kind_from_string(const std::string& s);
bool is_reference_kind(ValueKind kind);

// A single cell. Null is modelled as monostate; strings back every
// text-shaped kind.
class Value {
public:
  Value() = default;

  static Value null() { return Value(); }
  static Value text(std::string s) { return Value(std::move(s)); }
  static Value integer(std::int64_t i) { return Value(i); }
  static Value real(double d) { return Value(d); }
  static Value boolean(bool b) { return Value(b); }

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_boolean() const { return std::holds_alternative<bool>(v_); }

  const std::string& as_text() const;
  std::int64_t as_integer() const;
  double as_real() const;
  bool as_boolean() const;

  // Deterministic plain-text rendering (CSV cells, CLI tables). Null renders
  // as the empty string; floats use shortest round-trip form.
  std::string render() const;

  bool operator==(const Value& other) const { return v_ == other.v_; }
  bool operator!=(const Value& other) const { return v_ != other.v_; }

private:
  explicit Value(std::string s) : v_(std::move(s)) {}
  explicit Value(std::int64_t i) : v_(i) {}
  explicit Value(double d) : v_(d) {}
  explicit Value(bool b) : v_(b) {}

  std::variant<std::monostate, std::string, std::int64_t, double, bool> v_;
};

// Parse a plain string into a Value of the given kind (CLI filters, CSV
// ingestion). Empty string means null.
Value parse_value(ValueKind kind, const std::string& text);

using Row = std::map<std::string, Value>;

enum class SchemaKind { Domain, Ml };
enum class TableRole { Entity, Vocabulary, Asset, Feature };

const char* to_string(SchemaKind kind);
const char* to_string(TableRole role);
SchemaKind schema_kind_from_string(const std::string& s);
TableRole table_role_from_string(const std::string& s);

struct ColumnDef {
  std::string name;
  ValueKind kind = ValueKind::Text;
  std::string ref_target; // vocabulary/table name for reference kinds
  bool nullable = true;
};

// Caller-facing definition for define_table.
struct TableSpec {
  std::string name;
  SchemaKind schema_kind = SchemaKind::Domain;
  std::vector<ColumnDef> columns;
};

// Catalog-held table definition. System columns RID/RCT/RMT are implicit on
// every table and never appear in `columns`.
struct TableDef {
  std::string name;
  SchemaKind schema_kind = SchemaKind::Domain;
  TableRole role = TableRole::Entity;
  std::string vocab_prefix; // CURIE prefix for vocabulary tables
  std::vector<ColumnDef> columns;
  SnapshotId valid_from = 0;

  const ColumnDef* find_column(const std::string& name) const;
};

struct Entity {
  Rid rid;
  std::string rct; // creation time, catalog-managed
  std::string rmt; // last-modified time, catalog-managed
  Row values;

  const Value& value(const std::string& column) const;
};

// Conjunction of column equality predicates.
struct Filter {
  std::vector<std::pair<std::string, Value>> eq;

  Filter& where(std::string column, Value v) {
    eq.emplace_back(std::move(column), std::move(v));
    return *this;
  }
};

} // namespace deriva
