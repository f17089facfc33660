#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tradenet/core.hpp"

namespace tnet {

// Structural validator for the subset of JSON Schema the shipped report
// schemas use: type, required, properties, items, enum, minimum, minItems.
// Returns human-readable violations; empty means valid.
inline void validate_schema_node(const nlohmann::json& schema, const nlohmann::json& doc,
                                 const std::string& path, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    bool ok = (type == "object" && doc.is_object()) || (type == "array" && doc.is_array()) ||
              (type == "string" && doc.is_string()) || (type == "boolean" && doc.is_boolean()) ||
              (type == "integer" && doc.is_number_integer()) ||
              (type == "number" && doc.is_number());
    if (!ok) {
      errors.push_back(path + ": expected " + type);
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& v : schema["enum"])
      if (v == doc) ok = true;
    if (!ok) errors.push_back(path + ": value not in enum");
  }
  if (schema.contains("minimum") && doc.is_number() &&
      doc.get<double>() < schema["minimum"].get<double>())
    errors.push_back(path + ": below minimum");
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!doc.contains(key.get<std::string>()))
          errors.push_back(path + ": missing required key " + key.get<std::string>());
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (doc.contains(key)) validate_schema_node(sub, doc[key], path + "/" + key, errors);
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
      errors.push_back(path + ": fewer than minItems");
    if (schema.contains("items")) {
      std::size_t i = 0;
      for (const auto& el : doc)
        validate_schema_node(schema["items"], el, path + "[" + std::to_string(i++) + "]", errors);
    }
  }
}

inline std::vector<std::string> validate_against_schema(const nlohmann::json& schema,
                                                        const nlohmann::json& doc) {
  std::vector<std::string> errors;
  validate_schema_node(schema, doc, "", errors);
  return errors;
}

}  // namespace tnet
