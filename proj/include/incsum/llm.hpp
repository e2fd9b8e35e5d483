#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "incsum/json.hpp"
#include "incsum/patch.hpp"
#include "incsum/prompts.hpp"

namespace incsum {

struct LlmRequest {
  std::string prompt;
  double temperature = 0.8;
  // Replay key components: which template produced the prompt, and at which
  // turn of the stream it was issued.
  TemplateId template_id = TemplateId::GenerateEntity;
  int turn = 0;
};

struct LlmResponse {
  std::string text;
  std::map<std::string, std::string> meta;
};

struct LlmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CassetteMiss : LlmError {
  CassetteMiss(TemplateId id, int turn)
      : LlmError(std::string("cassette miss: template=") + template_name(id) +
                 " turn=" + std::to_string(turn)) {}
};

// Stable across platforms; used to key recorded prompts so template drift
// fails loudly instead of replaying stale responses.
inline std::string prompt_digest(std::string_view prompt) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// --- Cassette ----------------------------------------------------------
//
// Recorded prompt -> response fixtures. File format is JSON lines, one
// entry per line:
//   {"template": "...", "turn": N, "digest": "...", "response": "..."}

class Cassette {
 public:
  struct Key {
    std::string template_id;
    int turn;
    std::string digest;
    auto operator<=>(const Key&) const = default;
  };

  void add(Key key, std::string response) {
    entries_[std::move(key)] = std::move(response);
  }

  const std::string* find(const Key& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entries_.size(); }

  static Cassette load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LlmError("cannot open cassette: " + path);
    Cassette cassette;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      Json entry = Json::parse(line, nullptr, false);
      if (entry.is_discarded() || !entry.is_object()) {
        throw LlmError("bad cassette line " + std::to_string(lineno) + " in " + path);
      }
      cassette.add({entry.at("template").get<std::string>(), entry.at("turn").get<int>(),
                    entry.at("digest").get<std::string>()},
                   entry.at("response").get<std::string>());
    }
    return cassette;
  }

  static Json entry_json(const Key& key, const std::string& response) {
    Json entry = Json::object();
    entry["template"] = key.template_id;
    entry["turn"] = key.turn;
    entry["digest"] = key.digest;
    entry["response"] = response;
    return entry;
  }

 private:
  std::map<Key, std::string> entries_;
};

inline Cassette::Key request_key(const LlmRequest& request) {
  return {template_name(request.template_id), request.turn, prompt_digest(request.prompt)};
}

// --- Backends ----------------------------------------------------------

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual LlmResponse complete(const LlmRequest& request) = 0;
};

// Deterministic replay from a cassette. Unknown keys are a hard error so
// fixture drift surfaces immediately.
class ScriptedBackend final : public LlmBackend {
 public:
  explicit ScriptedBackend(Cassette cassette) : cassette_(std::move(cassette)) {}

  LlmResponse complete(const LlmRequest& request) override {
    const std::string* response = cassette_.find(request_key(request));
    if (response == nullptr) throw CassetteMiss(request.template_id, request.turn);
    return LlmResponse{*response, {{"backend", "scripted"}}};
  }

 private:
  Cassette cassette_;
};

// Delegates to an inner backend and appends every exchange to a cassette
// file. Appends are serialized; the inner backend may be called concurrently.
class RecorderBackend final : public LlmBackend {
 public:
  RecorderBackend(std::shared_ptr<LlmBackend> inner, std::string path)
      : inner_(std::move(inner)), path_(std::move(path)) {}

  LlmResponse complete(const LlmRequest& request) override {
    LlmResponse response = inner_->complete(request);
    const Cassette::Key key = request_key(request);
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw LlmError("cannot append to cassette: " + path_);
    out << Cassette::entry_json(key, response.text).dump() << "\n";
    return response;
  }

 private:
  std::shared_ptr<LlmBackend> inner_;
  std::string path_;
  std::mutex mutex_;
};

inline LlmResponse complete(LlmBackend& backend, const LlmRequest& request) {
  return backend.complete(request);
}

// --- Reply parsing -------------------------------------------------------

struct NoJsonFound : LlmError {
  NoJsonFound() : LlmError("no JSON object found in reply") {}
};

struct MalformedJson : LlmError {
  std::size_t offset;
  explicit MalformedJson(std::size_t off)
      : LlmError("malformed JSON in reply at offset " + std::to_string(off)), offset(off) {}
};

namespace detail {

// Span of the first balanced {...} in `text`, honoring string literals and
// escapes. Throws MalformedJson when an opening brace never closes.
inline std::pair<std::size_t, std::size_t> first_balanced_object(std::string_view text) {
  std::size_t start = text.find('{');
  if (start == std::string_view::npos) throw NoJsonFound();
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return {start, i + 1 - start};
    }
  }
  throw MalformedJson(text.size());
}

// LLM output routinely carries trailing commas before } or ]; strip them
// (outside string literals) so strict parsing can proceed.
inline std::string strip_trailing_commas(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        out.push_back(text[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < text.size() &&
             std::isspace(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

// First balanced JSON object in the reply, tolerant of code fences, leading
// or trailing prose, and trailing commas.
inline Json extract_json(std::string_view text) {
  auto [start, length] = detail::first_balanced_object(text);
  std::string candidate = detail::strip_trailing_commas(text.substr(start, length));
  Json parsed = Json::parse(candidate, nullptr, false);
  if (parsed.is_discarded()) throw MalformedJson(start);
  return parsed;
}

// Locates the [UPDATED OBJECTS] / [ADDED OBJECTS] sections of a chain-of-key
// reply and turns them into a patch set. A missing section yields an empty
// group; a present section with broken JSON is an error.
inline PatchSet parse_cok_response(std::string_view text) {
  PatchSet patch;
  auto parse_section = [&](std::string_view marker, PatchKind kind) {
    std::size_t pos = text.find(marker);
    if (pos == std::string_view::npos) return;
    std::string_view after = text.substr(pos + marker.size());
    Json section;
    try {
      section = extract_json(after);
    } catch (const NoJsonFound&) {
      throw MalformedJson(pos + marker.size());
    }
    if (!section.is_object()) throw MalformedJson(pos + marker.size());
    const char* op = kind == PatchKind::Update ? "update" : "add";
    for (const auto& [path_text, payload] : section.items()) {
      if (payload.is_object() && payload.contains(op)) {
        patch.propose(kind, path_text, payload[op]);
      } else if (payload.is_object() &&
                 (payload.contains("update") || payload.contains("add"))) {
        // Operation key does not match the section it sits under; honor it.
        PatchKind actual = payload.contains("update") ? PatchKind::Update : PatchKind::Add;
        patch.propose(actual, path_text,
                      payload[actual == PatchKind::Update ? "update" : "add"]);
      } else {
        patch.rejected.push_back({path_text, kind, SkipReason::InvalidEntry});
      }
    }
  };
  parse_section("[UPDATED OBJECTS]", PatchKind::Update);
  parse_section("[ADDED OBJECTS]", PatchKind::Add);
  return patch;
}

}  // namespace incsum
