#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incsum/json.hpp"
#include "incsum/llm.hpp"
#include "incsum/prompts.hpp"
#include "incsum/schema.hpp"
#include "incsum/tokenizer.hpp"

namespace incsum {

// The evolving structured summary: the memory state after ingesting
// documents 0..turn-1, plus the optional in-context token budget.
struct StructuredMemory {
  Json doc;
  Schema schema;
  int turn = 0;
  std::optional<std::size_t> token_budget;
};

struct SchemaMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Key-union merge: map keys are unioned, value lists concatenated with a's
// values first, recursion over nested maps. Exact duplicates are retained
// (a separate dedup pass removes them).
inline Json programmatic_merge(const Json& a, const Json& b) {
  if (a.is_object() && b.is_object()) {
    Json out = a;
    for (const auto& [key, value] : b.items()) {
      auto it = out.find(key);
      if (it == out.end()) {
        out[key] = value;
      } else {
        *it = programmatic_merge(*it, value);
      }
    }
    return out;
  }
  if (a.is_array() && b.is_array()) {
    Json out = a;
    for (const auto& element : b) out.push_back(element);
    return out;
  }
  if (a.type() != b.type()) {
    throw SchemaMismatchError("cannot merge values of different shapes");
  }
  return a;
}

// Collapses verbatim-equal strings within each value list to the first
// occurrence. Keys are untouched; semantic merging is not this pass's job.
inline Json exact_dedup(const Json& doc) {
  if (doc.is_object()) {
    Json out = Json::object();
    for (const auto& [key, value] : doc.items()) out[key] = exact_dedup(value);
    return out;
  }
  if (doc.is_array()) {
    Json out = Json::array();
    for (const auto& element : doc) {
      bool seen = false;
      for (const auto& kept : out) {
        if (kept == element) {
          seen = true;
          break;
        }
      }
      if (!seen) out.push_back(exact_dedup(element));
    }
    return out;
  }
  return doc;
}

// If a reply does not validate as-is but fits when wrapped under the
// schema's single map field, wrap it. The generation prompts show bare
// attribute maps in their examples, so models routinely omit the wrapper.
inline Json normalize_to_schema(const Json& doc, const Schema& schema) {
  if (validate(schema, doc).valid()) return doc;
  if (schema.root.fields.size() == 1 &&
      schema.root.fields.front().second.kind == SchemaNode::Kind::Map) {
    Json wrapped = Json::object();
    wrapped[schema.root.fields.front().first] = doc;
    if (validate(schema, wrapped).valid()) return wrapped;
  }
  return doc;
}

struct CompressionPolicy {
  enum class Fallback { TruncateValues, Fail };
  std::size_t budget = 0;
  int max_retries = 3;
  Fallback fallback = Fallback::TruncateValues;
};

struct BudgetUnreachableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct ListRef {
  Json* map;
  std::string key;
};

inline void collect_value_lists(Json& doc, std::vector<ListRef>& out) {
  if (!doc.is_object()) return;
  for (auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      out.push_back({&doc, key});
    } else if (value.is_object()) {
      collect_value_lists(value, out);
    }
  }
}

}  // namespace detail

// Deterministic truncation used when LLM compression fails: drop value
// strings from list tails, always taking from the currently longest list,
// removing a key once its list empties. Stops as soon as the compact
// serialization fits the budget.
inline Json truncate_to_budget(const Json& doc, const Schema& schema,
                               const Tokenizer& tokenizer, std::size_t budget) {
  Json current = doc;
  while (count_tokens(tokenizer, compact(current)) > budget) {
    std::vector<detail::ListRef> lists;
    detail::collect_value_lists(current, lists);
    detail::ListRef* longest = nullptr;
    std::size_t longest_size = 0;
    for (auto& ref : lists) {
      std::size_t size = (*ref.map)[ref.key].size();
      if (size > longest_size) {
        longest_size = size;
        longest = &ref;
      }
    }
    if (longest == nullptr) {
      // Nothing left to drop besides empty keys; remove those too.
      bool removed = false;
      for (auto& ref : lists) {
        ref.map->erase(ref.key);
        removed = true;
        break;
      }
      if (!removed) {
        throw BudgetUnreachableError(
            "budget " + std::to_string(budget) +
            " is smaller than the empty summary serialization");
      }
      continue;
    }
    Json& list = (*longest->map)[longest->key];
    list.erase(list.size() - 1);
    if (list.empty()) longest->map->erase(longest->key);
  }
  return current;
}

// Keeps the serialized memory within the token budget: unchanged when it
// already fits, otherwise LLM compression with bounded retries, then the
// deterministic truncation fallback. The result always fits and validates.
inline StructuredMemory enforce_budget(const StructuredMemory& memory, LlmBackend* backend,
                                       const Tokenizer& tokenizer,
                                       const CompressionPolicy& policy) {
  if (policy.budget == 0) throw std::invalid_argument("budget must be positive");
  if (count_tokens(tokenizer, compact(memory.doc)) <= policy.budget) return memory;

  if (backend != nullptr) {
    LlmRequest request;
    request.template_id = TemplateId::Compress;
    request.turn = memory.turn;
    request.prompt = render_prompt(TemplateId::Compress,
                                   {{"token_budget", std::to_string(policy.budget)},
                                    {"existing_summary", compact(memory.doc)}});
    for (int attempt = 0; attempt < policy.max_retries; ++attempt) {
      LlmResponse response;
      try {
        response = backend->complete(request);
      } catch (const LlmError&) {
        break;
      }
      try {
        Json candidate = normalize_to_schema(extract_json(response.text), memory.schema);
        if (validate(memory.schema, candidate).valid() &&
            count_tokens(tokenizer, compact(candidate)) <= policy.budget) {
          StructuredMemory out = memory;
          out.doc = std::move(candidate);
          return out;
        }
      } catch (const LlmError&) {
        // Unparseable compression reply counts as a failed attempt.
      }
    }
  }

  if (policy.fallback == CompressionPolicy::Fallback::Fail) {
    throw BudgetUnreachableError("compression failed and fallback is disabled");
  }
  StructuredMemory out = memory;
  out.doc = truncate_to_budget(memory.doc, memory.schema, tokenizer, policy.budget);
  return out;
}

}  // namespace incsum
