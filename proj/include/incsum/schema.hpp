#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incsum/json.hpp"
#include "incsum/path.hpp"

namespace incsum {

// The schema language covers exactly the shapes structured summaries use:
// objects with fixed fields, string-keyed maps, lists of strings, and string
// leaves. Nodes are immutable once built.
struct SchemaNode {
  enum class Kind { Object, Map, List, String };

  Kind kind = Kind::String;
  // Object only: field name -> node, in declaration order.
  std::vector<std::pair<std::string, SchemaNode>> fields;
  // Map: value type. List: element type.
  std::shared_ptr<const SchemaNode> child;

  static SchemaNode string_leaf() { return SchemaNode{Kind::String, {}, nullptr}; }

  static SchemaNode list_of(SchemaNode element) {
    return SchemaNode{Kind::List, {}, std::make_shared<SchemaNode>(std::move(element))};
  }

  static SchemaNode map_of(SchemaNode value) {
    return SchemaNode{Kind::Map, {}, std::make_shared<SchemaNode>(std::move(value))};
  }

  static SchemaNode object(std::vector<std::pair<std::string, SchemaNode>> fields) {
    return SchemaNode{Kind::Object, std::move(fields), nullptr};
  }

  const SchemaNode* field(const std::string& name) const {
    for (const auto& [fname, node] : fields) {
      if (fname == name) return &node;
    }
    return nullptr;
  }
};

struct Schema {
  std::string name;
  SchemaNode root;
};

enum class Violation {
  UnknownField,
  MissingField,
  LeafTypeMismatch,
  NonStringKey,
  NonListValue,
  NonStringElement,
};

inline const char* violation_name(Violation v) {
  switch (v) {
    case Violation::UnknownField: return "unknown-field";
    case Violation::MissingField: return "missing-field";
    case Violation::LeafTypeMismatch: return "leaf-type-mismatch";
    case Violation::NonStringKey: return "non-string-key";
    case Violation::NonListValue: return "non-list-value";
    case Violation::NonStringElement: return "non-string-element";
  }
  return "?";
}

struct ValidationReport {
  struct Entry {
    std::string path;
    Violation reason;
  };
  std::vector<Entry> violations;

  bool valid() const { return violations.empty(); }
};

// Hotel/entity summary shape: one top-level map of attribute name to a list
// of value strings.
inline Schema entity_schema() {
  return Schema{
      "entity",
      SchemaNode::object({
          {"attributes", SchemaNode::map_of(SchemaNode::list_of(SchemaNode::string_leaf()))},
      })};
}

// Book summary shape: six named sections, each a map of element name to a
// list of short explanations. All six must be present (possibly empty).
inline Schema book_schema() {
  auto section = [] { return SchemaNode::map_of(SchemaNode::list_of(SchemaNode::string_leaf())); };
  return Schema{
      "book",
      SchemaNode::object({
          {"characters", section()},
          {"events", section()},
          {"background", section()},
          {"motivations", section()},
          {"objectives", section()},
          {"other", section()},
      })};
}

namespace detail {

inline void validate_node(const SchemaNode& node, const Json& value,
                          std::vector<std::string>& segments, bool allow_partial_object,
                          std::vector<ValidationReport::Entry>& out) {
  auto here = [&] { return segments.empty() ? std::string("$") : render_path(segments); };
  switch (node.kind) {
    case SchemaNode::Kind::String:
      if (!value.is_string()) out.push_back({here(), Violation::LeafTypeMismatch});
      return;
    case SchemaNode::Kind::List:
      if (!value.is_array()) {
        out.push_back({here(), Violation::LeafTypeMismatch});
        return;
      }
      for (const auto& element : value) {
        if (node.child->kind == SchemaNode::Kind::String) {
          if (!element.is_string()) {
            out.push_back({here(), Violation::NonStringElement});
          }
        } else {
          validate_node(*node.child, element, segments, allow_partial_object, out);
        }
      }
      return;
    case SchemaNode::Kind::Map:
      if (!value.is_object()) {
        out.push_back({here(), Violation::LeafTypeMismatch});
        return;
      }
      for (const auto& [key, child_value] : value.items()) {
        if (key.empty()) {
          out.push_back({here(), Violation::NonStringKey});
          continue;
        }
        segments.push_back(key);
        if (node.child->kind == SchemaNode::Kind::List && !child_value.is_array()) {
          out.push_back({render_path(segments), Violation::NonListValue});
        } else {
          validate_node(*node.child, child_value, segments, allow_partial_object, out);
        }
        segments.pop_back();
      }
      return;
    case SchemaNode::Kind::Object:
      if (!value.is_object()) {
        out.push_back({here(), Violation::LeafTypeMismatch});
        return;
      }
      for (const auto& [key, child_value] : value.items()) {
        const SchemaNode* field = node.field(key);
        segments.push_back(key);
        if (field == nullptr) {
          out.push_back({render_path(segments), Violation::UnknownField});
        } else {
          validate_node(*field, child_value, segments, allow_partial_object, out);
        }
        segments.pop_back();
      }
      if (!allow_partial_object) {
        for (const auto& [fname, _] : node.fields) {
          if (!value.contains(fname)) {
            segments.push_back(fname);
            out.push_back({render_path(segments), Violation::MissingField});
            segments.pop_back();
          }
        }
      }
      return;
  }
}

}  // namespace detail

// Every problem is reported with its path; nothing throws.
inline ValidationReport validate(const Schema& schema, const Json& doc) {
  ValidationReport report;
  std::vector<std::string> segments;
  detail::validate_node(schema.root, doc, segments, /*allow_partial_object=*/false,
                        report.violations);
  return report;
}

// Like validate but applied to a patch payload against a subtree node:
// objects may omit fields (partial objects are allowed in adds).
inline ValidationReport validate_fragment(const SchemaNode& node, const Json& value) {
  ValidationReport report;
  std::vector<std::string> segments;
  detail::validate_node(node, value, segments, /*allow_partial_object=*/true,
                        report.violations);
  return report;
}

// The schema node governing the value at `path`; map segments consume one
// arbitrary key. Returns nullptr when a segment names a nonexistent object
// field or descends past a leaf.
inline const SchemaNode* node_at(const Schema& schema, const JsonPath& path) {
  const SchemaNode* cur = &schema.root;
  for (const auto& segment : path.segments) {
    switch (cur->kind) {
      case SchemaNode::Kind::Object:
        cur = cur->field(segment);
        if (cur == nullptr) return nullptr;
        break;
      case SchemaNode::Kind::Map:
        if (segment.empty()) return nullptr;
        cur = cur->child.get();
        break;
      default:
        return nullptr;
    }
  }
  return cur;
}

// --- Declarative schema files -----------------------------------------
//
// A schema file is a JSON document mirroring SchemaNode:
//   {"kind": "object", "fields": {"attributes": {"kind": "map", "value": ...}}}
//   {"kind": "map", "value": ...} / {"kind": "list", "element": ...} /
//   {"kind": "string"}

inline SchemaNode schema_node_from_json(const Json& spec) {
  if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
    throw std::runtime_error("schema node must be an object with a \"kind\" string");
  }
  const std::string kind = spec["kind"].get<std::string>();
  if (kind == "string") {
    return SchemaNode::string_leaf();
  }
  if (kind == "list") {
    if (!spec.contains("element")) throw std::runtime_error("list node needs \"element\"");
    return SchemaNode::list_of(schema_node_from_json(spec["element"]));
  }
  if (kind == "map") {
    if (!spec.contains("value")) throw std::runtime_error("map node needs \"value\"");
    return SchemaNode::map_of(schema_node_from_json(spec["value"]));
  }
  if (kind == "object") {
    if (!spec.contains("fields") || !spec["fields"].is_object()) {
      throw std::runtime_error("object node needs a \"fields\" object");
    }
    std::vector<std::pair<std::string, SchemaNode>> fields;
    for (const auto& [name, child] : spec["fields"].items()) {
      if (name.empty()) throw std::runtime_error("object field names must be non-empty");
      fields.emplace_back(name, schema_node_from_json(child));
    }
    return SchemaNode::object(std::move(fields));
  }
  throw std::runtime_error("unknown schema node kind: " + kind);
}

inline Schema schema_from_json(const Json& spec, std::string name = "custom") {
  SchemaNode root = schema_node_from_json(spec);
  if (root.kind != SchemaNode::Kind::Object) {
    throw std::runtime_error("schema root must be an object node");
  }
  return Schema{std::move(name), std::move(root)};
}

inline Json schema_node_to_json(const SchemaNode& node) {
  Json out = Json::object();
  switch (node.kind) {
    case SchemaNode::Kind::String:
      out["kind"] = "string";
      break;
    case SchemaNode::Kind::List:
      out["kind"] = "list";
      out["element"] = schema_node_to_json(*node.child);
      break;
    case SchemaNode::Kind::Map:
      out["kind"] = "map";
      out["value"] = schema_node_to_json(*node.child);
      break;
    case SchemaNode::Kind::Object: {
      out["kind"] = "object";
      Json fields = Json::object();
      for (const auto& [name, child] : node.fields) {
        fields[name] = schema_node_to_json(child);
      }
      out["fields"] = std::move(fields);
      break;
    }
  }
  return out;
}

namespace detail {

inline std::string type_annotation(const SchemaNode& node) {
  switch (node.kind) {
    case SchemaNode::Kind::String: return "str";
    case SchemaNode::Kind::List: return "list[" + type_annotation(*node.child) + "]";
    case SchemaNode::Kind::Map: return "dict[str, " + type_annotation(*node.child) + "]";
    case SchemaNode::Kind::Object: return "dict";
  }
  return "?";
}

}  // namespace detail

// TypedDict-style rendering of the schema for the [CLASS] prompt section.
inline std::string class_text(const Schema& schema) {
  std::string out = "class Summary(TypedDict):\n";
  for (const auto& [name, node] : schema.root.fields) {
    out += "  " + name + ": " + detail::type_annotation(node);
    if (schema.name == "entity" && name == "attributes") {
      out += "  # Keyed by attribute, with a list of sufficient details about the attribute.";
    }
    out += "\n";
  }
  return out;
}

// An instance with every object field present and every map empty. This is
// the smallest document that validates.
inline Json empty_summary(const SchemaNode& node) {
  switch (node.kind) {
    case SchemaNode::Kind::String: return "";
    case SchemaNode::Kind::List: return Json::array();
    case SchemaNode::Kind::Map: return Json::object();
    case SchemaNode::Kind::Object: {
      Json out = Json::object();
      for (const auto& [name, child] : node.fields) {
        out[name] = empty_summary(child);
      }
      return out;
    }
  }
  return nullptr;
}

inline Json empty_summary(const Schema& schema) { return empty_summary(schema.root); }

}  // namespace incsum
