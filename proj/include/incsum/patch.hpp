#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incsum/json.hpp"
#include "incsum/path.hpp"
#include "incsum/schema.hpp"

namespace incsum {

enum class PatchKind { Update, Add };

inline const char* patch_kind_name(PatchKind k) {
  return k == PatchKind::Update ? "update" : "add";
}

enum class SkipReason {
  PathNotFound,
  KeyAlreadyExistsConvertedToUpdate,
  TypeMismatch,
  UnparseablePath,
  SchemaViolation,
  InvalidEntry,
};

inline const char* skip_reason_name(SkipReason r) {
  switch (r) {
    case SkipReason::PathNotFound: return "path-not-found";
    case SkipReason::KeyAlreadyExistsConvertedToUpdate:
      return "key-already-exists-converted-to-update";
    case SkipReason::TypeMismatch: return "type-mismatch";
    case SkipReason::UnparseablePath: return "unparseable-path";
    case SkipReason::SchemaViolation: return "schema-violation";
    case SkipReason::InvalidEntry: return "invalid-entry";
  }
  return "?";
}

// The proposal sets parsed from a chain-of-key reply: updates and adds keyed
// by path text, in the model's emission order. Entries whose path text does
// not parse (or that carry neither operation key) land in `rejected` so the
// batch application can report them instead of silently dropping them.
struct PatchSet {
  std::vector<std::pair<std::string, Json>> updates;
  std::vector<std::pair<std::string, Json>> adds;

  struct Rejected {
    std::string path_text;
    PatchKind kind;
    SkipReason reason;
  };
  std::vector<Rejected> rejected;

  void propose(PatchKind kind, std::string path_text, Json value) {
    try {
      parse_path(path_text);
    } catch (const PathParseError&) {
      rejected.push_back({std::move(path_text), kind, SkipReason::UnparseablePath});
      return;
    }
    auto& group = kind == PatchKind::Update ? updates : adds;
    group.emplace_back(std::move(path_text), std::move(value));
  }

  bool empty() const { return updates.empty() && adds.empty() && rejected.empty(); }

  // The Appendix-style wire shape: {"<path>": {"update": v} | {"add": v}}.
  Json to_json() const {
    Json out = Json::object();
    for (const auto& [path, value] : updates) out[path] = Json{{"update", value}};
    for (const auto& [path, value] : adds) out[path] = Json{{"add", value}};
    return out;
  }
};

struct PatchOutcome {
  struct Applied {
    std::string path;
    PatchKind kind;
  };
  struct Skipped {
    std::string path;
    PatchKind kind;
    SkipReason reason;
  };
  std::vector<Applied> applied;
  std::vector<Skipped> skipped;
  bool result_valid = true;

  Json to_json() const {
    Json out = Json::object();
    out["applied"] = Json::array();
    for (const auto& entry : applied) {
      out["applied"].push_back(Json{{"path", entry.path}, {"kind", patch_kind_name(entry.kind)}});
    }
    out["skipped"] = Json::array();
    for (const auto& entry : skipped) {
      out["skipped"].push_back(Json{{"path", entry.path},
                                    {"kind", patch_kind_name(entry.kind)},
                                    {"reason", skip_reason_name(entry.reason)}});
    }
    out["result_valid"] = result_valid;
    return out;
  }
};

struct PatchError : std::runtime_error {
  SkipReason reason;
  PatchError(SkipReason r, const std::string& what)
      : std::runtime_error(what), reason(r) {}
};

namespace detail {

// Update never discards: lists take the union-append of new strings, maps
// and objects take the key union with recursion, string leaves are replaced.
inline void deep_union(Json& target, const Json& value) {
  if (target.is_array() && value.is_array()) {
    for (const auto& element : value) {
      bool present = false;
      for (const auto& existing : target) {
        if (existing == element) {
          present = true;
          break;
        }
      }
      if (!present) target.push_back(element);
    }
    return;
  }
  if (target.is_object() && value.is_object()) {
    for (const auto& [key, child] : value.items()) {
      auto it = target.find(key);
      if (it == target.end()) {
        target[key] = child;
      } else {
        deep_union(*it, child);
      }
    }
    return;
  }
  target = value;
}

inline Json* resolve_mutable(Json& doc, const JsonPath& path) {
  Json* cur = &doc;
  for (const auto& segment : path.segments) {
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(segment);
    if (it == cur->end()) return nullptr;
    cur = &*it;
  }
  return cur;
}

}  // namespace detail

// Merges `value` into the existing node at `path`. The target must exist and
// the payload must fit the schema node governing that path.
inline Json apply_update(const Json& doc, const JsonPath& path, const Json& value,
                         const Schema& schema) {
  const SchemaNode* node = node_at(schema, path);
  if (node == nullptr) {
    throw PatchError(SkipReason::SchemaViolation,
                     "path not legal under schema: " + render_path(path));
  }
  if (!validate_fragment(*node, value).valid()) {
    throw PatchError(SkipReason::TypeMismatch,
                     "value does not match schema type at " + render_path(path));
  }
  Json result = doc;
  Json* target = detail::resolve_mutable(result, path);
  if (target == nullptr) {
    throw PatchError(SkipReason::PathNotFound, "no value at " + render_path(path));
  }
  detail::deep_union(*target, value);
  return result;
}

// Inserts a new key at the parent of `path`. The key must be absent, the
// parent must exist, and the path must be legal under the schema. Partial
// objects are accepted as payloads.
inline Json apply_add(const Json& doc, const JsonPath& path, const Json& value,
                      const Schema& schema) {
  const SchemaNode* node = node_at(schema, path);
  if (node == nullptr) {
    throw PatchError(SkipReason::SchemaViolation,
                     "path not legal under schema: " + render_path(path));
  }
  if (!validate_fragment(*node, value).valid()) {
    throw PatchError(SkipReason::TypeMismatch,
                     "value does not match schema type at " + render_path(path));
  }
  if (resolve(doc, path) != nullptr) {
    throw PatchError(SkipReason::KeyAlreadyExistsConvertedToUpdate,
                     "key already exists at " + render_path(path));
  }
  JsonPath parent{std::vector<std::string>(path.segments.begin(), path.segments.end() - 1)};
  Json result = doc;
  Json* parent_value =
      parent.segments.empty() ? &result : detail::resolve_mutable(result, parent);
  if (parent_value == nullptr || !parent_value->is_object()) {
    throw PatchError(SkipReason::PathNotFound, "no parent for " + render_path(path));
  }
  (*parent_value)[path.segments.back()] = value;
  return result;
}

// Applies all updates, then all adds, each entry independently: a failing
// entry is skipped and recorded, never aborts the batch. An add whose key
// already exists by the time it runs (including a key just written by an
// update on the same path) is downgraded to a union-append update and
// audited as such.
inline std::pair<Json, PatchOutcome> apply_patch_set(const Json& doc, const PatchSet& patch,
                                                     const Schema& schema) {
  Json current = doc;
  PatchOutcome outcome;

  for (const auto& entry : patch.rejected) {
    outcome.skipped.push_back({entry.path_text, entry.kind, entry.reason});
  }

  auto try_apply = [&](const std::string& path_text, PatchKind kind, const Json& value) {
    JsonPath path = parse_path(path_text);  // pre-validated at construction
    if (kind == PatchKind::Add && resolve(current, path) != nullptr) {
      // Key exists: downgrade to union-append so no information is lost.
      Json candidate = apply_update(current, path, value, schema);
      if (!validate(schema, candidate).valid()) {
        outcome.skipped.push_back({path_text, kind, SkipReason::SchemaViolation});
        return;
      }
      current = std::move(candidate);
      outcome.skipped.push_back(
          {path_text, kind, SkipReason::KeyAlreadyExistsConvertedToUpdate});
      return;
    }
    Json candidate = kind == PatchKind::Update ? apply_update(current, path, value, schema)
                                               : apply_add(current, path, value, schema);
    if (!validate(schema, candidate).valid()) {
      outcome.skipped.push_back({path_text, kind, SkipReason::SchemaViolation});
      return;
    }
    current = std::move(candidate);
    outcome.applied.push_back({path_text, kind});
  };

  auto run_group = [&](const std::vector<std::pair<std::string, Json>>& group, PatchKind kind) {
    for (const auto& [path_text, value] : group) {
      try {
        try_apply(path_text, kind, value);
      } catch (const PatchError& err) {
        outcome.skipped.push_back({path_text, kind, err.reason});
      }
    }
  };
  run_group(patch.updates, PatchKind::Update);
  run_group(patch.adds, PatchKind::Add);

  outcome.result_valid = validate(schema, current).valid();
  return {std::move(current), std::move(outcome)};
}

}  // namespace incsum
