#include "stripspec/io.hpp"

#include <string>
#include <vector>

namespace stripspec::io {

namespace {

using nlohmann::json;

// Generated from schema/runconfig-v1.json; a test pins the copies equal.
const char* kSchemaText = R"schema(
{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "stripspec/runconfig-v1",
  "title": "stripspec run configuration",
  "type": "object",
  "required": ["version", "command", "params"],
  "additionalProperties": false,
  "properties": {
    "version": { "enum": [1] },
    "command": {
      "enum": ["bands", "density", "schur-stats", "rank-scan", "verify", "mc", "fold"]
    },
    "params": { "type": "object" }
  },
  "$defs": {
    "alpha": {
      "type": "array",
      "minItems": 1,
      "items": { "type": "number" }
    },
    "grid": {
      "type": "array",
      "minItems": 1,
      "items": { "type": "number" }
    },
    "seed": { "type": "integer", "minimum": 0 },
    "potential": {
      "type": "object",
      "required": ["kind"],
      "additionalProperties": false,
      "properties": {
        "kind": { "enum": ["zero", "diagonal_iid", "hermitian_gaussian"] },
        "sigma": { "type": "number", "minimum": 0 },
        "decay_p": { "type": "number", "minimum": 0 }
      }
    },
    "bands": {
      "type": "object",
      "required": ["alpha"],
      "additionalProperties": false,
      "properties": {
        "alpha": { "$ref": "alpha" }
      }
    },
    "density": {
      "type": "object",
      "required": ["alpha", "depth", "grid"],
      "additionalProperties": false,
      "properties": {
        "alpha": { "$ref": "alpha" },
        "potential": { "$ref": "potential" },
        "seed": { "$ref": "seed" },
        "depth": { "type": "integer", "exclusiveMinimum": 0 },
        "grid": { "$ref": "grid" },
        "x": {
          "type": "array",
          "minItems": 1,
          "items": { "type": "number" }
        }
      }
    },
    "schur-stats": {
      "type": "object",
      "required": ["alpha", "lambda", "n"],
      "additionalProperties": false,
      "properties": {
        "alpha": { "$ref": "alpha" },
        "potential": { "$ref": "potential" },
        "seed": { "$ref": "seed" },
        "lambda": { "type": "number" },
        "m": { "type": "integer", "minimum": 0 },
        "n": { "type": "integer", "exclusiveMinimum": 0 }
      }
    },
    "rank-scan": {
      "type": "object",
      "required": ["alpha", "grid", "depth"],
      "additionalProperties": false,
      "properties": {
        "alpha": { "$ref": "alpha" },
        "potential": { "$ref": "potential" },
        "seed": { "$ref": "seed" },
        "grid": { "$ref": "grid" },
        "m": { "type": "integer", "minimum": 0 },
        "depth": { "type": "integer", "exclusiveMinimum": 0 }
      }
    },
    "verify": {
      "type": "object",
      "required": ["l", "depth", "z", "samples"],
      "additionalProperties": false,
      "properties": {
        "l": { "type": "integer", "exclusiveMinimum": 0, "maximum": 8 },
        "depth": { "type": "integer", "exclusiveMinimum": 0 },
        "z": {
          "type": "object",
          "required": ["re", "im"],
          "additionalProperties": false,
          "properties": {
            "re": { "type": "number" },
            "im": { "type": "number" }
          }
        },
        "samples": { "type": "integer", "minimum": 1 },
        "seed": { "$ref": "seed" }
      }
    },
    "mc": {
      "type": "object",
      "required": ["alpha", "num_samples", "n", "grid"],
      "additionalProperties": false,
      "properties": {
        "alpha": { "$ref": "alpha" },
        "potential": { "$ref": "potential" },
        "seed": { "$ref": "seed" },
        "num_samples": { "type": "integer", "minimum": 1 },
        "n": { "type": "integer", "exclusiveMinimum": 0 },
        "m": { "type": "integer", "minimum": 0 },
        "grid": { "$ref": "grid" },
        "threads": { "type": "integer", "minimum": 1 }
      }
    },
    "fold": {
      "type": "object",
      "required": ["l", "sites"],
      "additionalProperties": false,
      "properties": {
        "l": { "type": "integer", "exclusiveMinimum": 0, "maximum": 8 },
        "sites": { "type": "integer", "exclusiveMinimum": 0 },
        "seed": { "$ref": "seed" },
        "alpha": { "$ref": "alpha" },
        "potential": { "$ref": "potential" }
      }
    }
  }
}
)schema";

bool type_ok(const json& inst, const std::string& t) {
  if (t == "object") return inst.is_object();
  if (t == "array") return inst.is_array();
  if (t == "string") return inst.is_string();
  if (t == "boolean") return inst.is_boolean();
  if (t == "integer") return inst.is_number_integer() || inst.is_number_unsigned();
  if (t == "number") return inst.is_number();
  return false;
}

// Subset of JSON Schema sufficient for the runconfig grammar: type, enum,
// numeric bounds, required/properties/additionalProperties, items/minItems,
// and local $ref into $defs.
void check(const json& inst, const json& node_in, const json& defs,
           const std::string& path, std::vector<std::string>& out) {
  const json* nodep = &node_in;
  if (nodep->is_object() && nodep->contains("$ref"))
    nodep = &defs.at((*nodep)["$ref"].get<std::string>());
  const json& node = *nodep;
  std::string where = path.empty() ? "/" : path;

  if (node.contains("enum")) {
    for (const auto& v : node["enum"])
      if (inst == v) return;
    out.push_back(where + ": must be one of " + node["enum"].dump());
    return;
  }
  if (node.contains("type")) {
    std::string t = node["type"].get<std::string>();
    if (!type_ok(inst, t)) {
      out.push_back(where + ": expected " + t);
      return;
    }
  }
  if (inst.is_number()) {
    double v = inst.get<double>();
    if (node.contains("minimum") && v < node["minimum"].get<double>())
      out.push_back(where + ": below minimum " + node["minimum"].dump());
    if (node.contains("exclusiveMinimum") && v <= node["exclusiveMinimum"].get<double>())
      out.push_back(where + ": must exceed " + node["exclusiveMinimum"].dump());
    if (node.contains("maximum") && v > node["maximum"].get<double>())
      out.push_back(where + ": above maximum " + node["maximum"].dump());
  }
  if (inst.is_object()) {
    if (node.contains("required"))
      for (const auto& k : node["required"])
        if (!inst.contains(k.get<std::string>()))
          out.push_back(where + ": missing required key " + k.get<std::string>());
    const json props = node.value("properties", json::object());
    for (const auto& [key, val] : inst.items()) {
      if (props.contains(key)) {
        check(val, props[key], defs, path + "/" + key, out);
      } else if (node.value("additionalProperties", json(true)) == json(false)) {
        out.push_back(path + "/" + key + ": unknown key");
      }
    }
  }
  if (inst.is_array()) {
    if (node.contains("minItems") && inst.size() < node["minItems"].get<std::size_t>())
      out.push_back(where + ": needs at least " + node["minItems"].dump() + " items");
    if (node.contains("items"))
      for (std::size_t i = 0; i < inst.size(); ++i)
        check(inst[i], node["items"], defs, path + "/" + std::to_string(i), out);
  }
}

}  // namespace

const std::string& config_schema_text() {
  static const std::string text(kSchemaText + 1);  // drop the leading newline
  return text;
}

std::vector<std::string> validate_runconfig(const nlohmann::json& config) {
  static const json schema = json::parse(config_schema_text());
  const json& defs = schema.at("$defs");
  std::vector<std::string> out;
  check(config, schema, defs, "", out);
  if (!out.empty()) return out;
  std::string cmd = config["command"].get<std::string>();
  check(config["params"], defs.at(cmd), defs, "/params", out);
  return out;
}

}  // namespace stripspec::io
