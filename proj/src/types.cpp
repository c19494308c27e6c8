#include "deriva/types.hpp"

#include <charconv>
#include <cstdlib>

#include "deriva/clock.hpp"

namespace deriva {

const char* to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Text: return "text";
    case ValueKind::Integer: return "integer";
    case ValueKind::Float: return "float";
    case ValueKind::Boolean: return "boolean";
    case ValueKind::Timestamp: return "timestamp";
    case ValueKind::TermRef: return "term_ref";
    case ValueKind::RidRef: return "rid_ref";
    case ValueKind::AssetRef: return "asset_ref";
    case ValueKind::RidAny: return "rid_any";
  }
  return "text";
}

ValueKind value_kind_from_string(const std::string& s) {
  if (s == "text") return ValueKind::Text;
  if (s == "integer") return ValueKind::Integer;
  if (s == "float") return ValueKind::Float;
  if (s == "boolean") return ValueKind::Boolean;
  if (s == "timestamp") return ValueKind::Timestamp;
  if (s == "term_ref") return ValueKind::TermRef;
  if (s == "rid_ref") return ValueKind::RidRef;
  if (s == "asset_ref") return ValueKind::AssetRef;
  if (s == "rid_any") return ValueKind::RidAny;
  fail(ErrorKind::Validation, "bad_value_kind", "unknown value kind: " + s);
}

bool is_reference_kind(ValueKind kind) {
  return kind == ValueKind::TermRef || kind == ValueKind::RidRef ||
         kind == ValueKind::AssetRef || kind == ValueKind::RidAny;
}

const std::string& Value::as_text() const {
  if (!is_text())
    fail(ErrorKind::Validation, "type_mismatch", "value is not text");
  return std::get<std::string>(v_);
}

std::int64_t Value::as_integer() const {
  if (!is_integer())
    fail(ErrorKind::Validation, "type_mismatch", "value is not an integer");
  return std::get<std::int64_t>(v_);
}

double Value::as_real() const {
  if (is_integer()) return static_cast<double>(std::get<std::int64_t>(v_));
  if (!is_real())
    fail(ErrorKind::Validation, "type_mismatch", "value is not a float");
  return std::get<double>(v_);
}

bool Value::as_boolean() const {
  if (!is_boolean())
    fail(ErrorKind::Validation, "type_mismatch", "value is not a boolean");
  return std::get<bool>(v_);
}

std::string Value::render() const {
  if (is_null()) return "";
  if (is_text()) return std::get<std::string>(v_);
  if (is_boolean()) return std::get<bool>(v_) ? "true" : "false";
  if (is_integer()) return std::to_string(std::get<std::int64_t>(v_));
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v_));
  (void)ec;
  return std::string(buf, end);
}

Value parse_value(ValueKind kind, const std::string& text) {
  if (text.empty()) return Value::null();
  switch (kind) {
    case ValueKind::Integer: {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
      if (ec != std::errc() || p != text.data() + text.size())
        fail(ErrorKind::Validation, "bad_integer", "not an integer: " + text);
      return Value::integer(i);
    }
    case ValueKind::Float: {
      char* end = nullptr;
      double d = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size())
        fail(ErrorKind::Validation, "bad_float", "not a float: " + text);
      return Value::real(d);
    }
    case ValueKind::Boolean: {
      if (text == "true") return Value::boolean(true);
      if (text == "false") return Value::boolean(false);
      fail(ErrorKind::Validation, "bad_boolean", "not a boolean: " + text);
    }
    case ValueKind::Timestamp:
      if (!looks_like_timestamp(text))
        fail(ErrorKind::Validation, "bad_timestamp", "not a timestamp: " + text);
      return Value::text(text);
    default:
      return Value::text(text);
  }
}

const char* to_string(SchemaKind kind) {
  return kind == SchemaKind::Ml ? "ml" : "domain";
}

const char* to_string(TableRole role) {
  switch (role) {
    case TableRole::Entity: return "entity";
    case TableRole::Vocabulary: return "vocabulary";
    case TableRole::Asset: return "asset";
    case TableRole::Feature: return "feature";
  }
  return "entity";
}

SchemaKind schema_kind_from_string(const std::string& s) {
  if (s == "ml") return SchemaKind::Ml;
  if (s == "domain") return SchemaKind::Domain;
  fail(ErrorKind::Validation, "bad_schema_kind", "unknown schema kind: " + s);
}

TableRole table_role_from_string(const std::string& s) {
  if (s == "entity") return TableRole::Entity;
  if (s == "vocabulary") return TableRole::Vocabulary;
  if (s == "asset") return TableRole::Asset;
  if (s == "feature") return TableRole::Feature;
  fail(ErrorKind::Validation, "bad_table_role", "unknown table role: " + s);
}

const ColumnDef* TableDef::find_column(const std::string& column) const {
  for (const auto& c : columns)
    if (c.name == column) return &c;
  return nullptr;
}

const Value& Entity::value(const std::string& column) const {
  static const Value null_value;
  auto it = values.find(column);
  return it == values.end() ? null_value : it->second;
}

} // namespace deriva
