#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "incsum/json.hpp"
#include "incsum/llm.hpp"
#include "incsum/memory.hpp"
#include "incsum/patch.hpp"
#include "incsum/prompts.hpp"
#include "incsum/schema.hpp"
#include "incsum/tokenizer.hpp"

namespace incsum {

enum class Strategy { GoText, GoJson, GuText, GuJson, GmJson, CokJson };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::GoText: return "go_text";
    case Strategy::GoJson: return "go_json";
    case Strategy::GuText: return "gu_text";
    case Strategy::GuJson: return "gu_json";
    case Strategy::GmJson: return "gm_json";
    case Strategy::CokJson: return "cok_json";
  }
  return "?";
}

inline std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "go_text") return Strategy::GoText;
  if (name == "go_json") return Strategy::GoJson;
  if (name == "gu_text") return Strategy::GuText;
  if (name == "gu_json") return Strategy::GuJson;
  if (name == "gm_json") return Strategy::GmJson;
  if (name == "cok_json") return Strategy::CokJson;
  return std::nullopt;
}

inline bool strategy_uses_json(Strategy s) {
  return s != Strategy::GoText && s != Strategy::GuText;
}

inline std::vector<Strategy> all_strategies() {
  return {Strategy::GoText, Strategy::GoJson, Strategy::GuText,
          Strategy::GuJson, Strategy::GmJson, Strategy::CokJson};
}

enum class OutputFormat { Json, Text };

struct RunConfig {
  Strategy strategy = Strategy::CokJson;
  Schema schema = entity_schema();
  OutputFormat output_format = OutputFormat::Json;
  double temperature = 0.8;
  std::optional<std::size_t> token_budget;
  std::size_t chunk_limit = 2000;
  Task task = Task::Entity;
  std::string entity_name;
  // Generate-merge: run the LLM dedup pass every turn (default) or only
  // once before the final summary.
  bool dedup_per_turn = true;

  Json to_json() const {
    Json out = Json::object();
    out["strategy"] = strategy_name(strategy);
    out["schema"] = schema.name;
    out["output_format"] = output_format == OutputFormat::Json ? "json" : "text";
    out["temperature"] = temperature;
    if (token_budget) out["token_budget"] = *token_budget;
    out["chunk_limit"] = chunk_limit;
    out["task"] = task == Task::Entity ? "entity" : "book";
    if (!entity_name.empty()) out["entity"] = entity_name;
    out["dedup_per_turn"] = dedup_per_turn;
    return out;
  }
};

struct TurnRecord {
  int turn = 0;
  // Object tree for json strategies, a plain string for text strategies.
  Json memory_snapshot;
  std::size_t memory_tokens = 0;
  std::optional<PatchOutcome> patch_outcome;
  int prompts_issued = 0;

  Json to_json() const {
    Json out = Json::object();
    out["turn"] = turn;
    out["memory"] = memory_snapshot;
    out["memory_tokens"] = memory_tokens;
    out["prompts_issued"] = prompts_issued;
    if (patch_outcome) out["patch_outcome"] = patch_outcome->to_json();
    return out;
  }
};

struct RunResult {
  std::vector<TurnRecord> turns;
  Json final_summary;

  Json to_json(const RunConfig& cfg) const {
    Json out = Json::object();
    out["config"] = cfg.to_json();
    out["turns"] = Json::array();
    for (const auto& turn : turns) out["turns"].push_back(turn.to_json());
    out["final_summary"] = final_summary;
    return out;
  }
};

struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stable, lossless-in-keys rendering used when no backend is available to
// phrase the final summary. One "Key: v1; v2" line per map entry; the book
// schema's sections become headers in field order.
inline std::string render_text_summary(const Json& doc) {
  std::string out;
  auto render_map = [&](const Json& map, const std::string& indent) {
    for (const auto& [key, values] : map.items()) {
      out += indent + key + ":";
      if (values.is_array()) {
        bool first = true;
        for (const auto& value : values) {
          out += first ? " " : "; ";
          out += value.is_string() ? value.get<std::string>() : compact(value);
          first = false;
        }
      }
      out += "\n";
    }
  };
  if (!doc.is_object()) return out;
  const bool flat = doc.size() == 1 && doc.contains("attributes") &&
                    doc["attributes"].is_object();
  if (flat) {
    render_map(doc["attributes"], "");
  } else {
    for (const auto& [field, section] : doc.items()) {
      if (!section.is_object()) continue;
      out += field + ":\n";
      render_map(section, "  ");
    }
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  if (!out.empty()) out.push_back('\n');
  return out;
}

namespace detail {

class PipelineRun {
 public:
  PipelineRun(LlmBackend& backend, const RunConfig& cfg, const Tokenizer& tokenizer)
      : backend_(backend), cfg_(cfg), tokenizer_(tokenizer) {}

  LlmResponse ask(TemplateId id, int turn, const std::string& prompt) {
    LlmRequest request;
    request.prompt = prompt;
    request.temperature = cfg_.temperature;
    request.template_id = id;
    request.turn = turn;
    ++prompts_this_turn_;
    return backend_.complete(request);
  }

  // One re-ask with the same prompt on an unparseable reply, then hard error.
  Json ask_json(TemplateId id, int turn, const std::string& prompt) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      LlmResponse response = ask(id, turn, prompt);
      try {
        Json doc = normalize_to_schema(extract_json(response.text), cfg_.schema);
        auto report = validate(cfg_.schema, doc);
        if (!report.valid()) {
          if (attempt == 0) continue;
          throw PipelineError(std::string("reply does not validate against schema (") +
                              violation_name(report.violations.front().reason) + " at " +
                              report.violations.front().path + ")");
        }
        return doc;
      } catch (const LlmError& err) {
        if (attempt == 0) continue;
        throw PipelineError(std::string("unusable LLM reply: ") + err.what());
      }
    }
    throw PipelineError("unusable LLM reply");
  }

  std::string generate_prompt(const std::string& document) const {
    if (cfg_.task == Task::Entity) {
      return render_prompt(TemplateId::GenerateEntity,
                           {{"entity_name", cfg_.entity_name}, {"paragraph", document}});
    }
    const bool json = strategy_uses_json(cfg_.strategy);
    return render_prompt(
        TemplateId::GenerateBook,
        {{"special_instruction",
          template_body(json ? TemplateId::JsonInstruction : TemplateId::TextInstruction)},
         {"book_chunk", document},
         {"output_format", json ? "JSON format" : "text format"}});
  }

  TemplateId generate_template() const {
    return cfg_.task == Task::Entity ? TemplateId::GenerateEntity : TemplateId::GenerateBook;
  }

  std::string update_prompt(const std::string& document, const std::string& memory) const {
    if (cfg_.task == Task::Entity) {
      return render_prompt(TemplateId::UpdateEntity, {{"entity_name", cfg_.entity_name},
                                                      {"paragraph", document},
                                                      {"existing_summary", memory}});
    }
    const bool json = strategy_uses_json(cfg_.strategy);
    return render_prompt(TemplateId::UpdateBook,
                         {{"book_chunk", document},
                          {"memory", memory},
                          {"output_format", json ? "JSON format" : "text format"}});
  }

  TemplateId update_template() const {
    return cfg_.task == Task::Entity ? TemplateId::UpdateEntity : TemplateId::UpdateBook;
  }

  void record_turn(int turn, const Json& snapshot, std::optional<PatchOutcome> outcome) {
    TurnRecord record;
    record.turn = turn;
    record.memory_snapshot = snapshot;
    record.memory_tokens = count_tokens(
        tokenizer_, snapshot.is_string() ? snapshot.get<std::string>() : compact(snapshot));
    record.patch_outcome = std::move(outcome);
    record.prompts_issued = prompts_this_turn_;
    prompts_this_turn_ = 0;
    result_.turns.push_back(std::move(record));
  }

  Json apply_budget_json(const Json& doc, int turn) {
    if (!cfg_.token_budget) return doc;
    StructuredMemory memory{doc, cfg_.schema, turn, cfg_.token_budget};
    CompressionPolicy policy;
    policy.budget = *cfg_.token_budget;
    return enforce_budget(memory, &backend_, tokenizer_, policy).doc;
  }

  // Text memories have no compression prompt; over-budget text is truncated
  // at the largest fitting prefix.
  std::string apply_budget_text(const std::string& text) {
    if (!cfg_.token_budget || count_tokens(tokenizer_, text) <= *cfg_.token_budget) {
      return text;
    }
    std::size_t lo = 0, hi = text.size(), best = 0;
    while (lo <= hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (count_tokens(tokenizer_, text.substr(0, mid)) <= *cfg_.token_budget) {
        best = mid;
        lo = mid + 1;
      } else {
        if (mid == 0) break;
        hi = mid - 1;
      }
    }
    return text.substr(0, best);
  }

  RunResult take_result() { return std::move(result_); }

  LlmBackend& backend_;
  const RunConfig& cfg_;
  const Tokenizer& tokenizer_;
  RunResult result_;
  int prompts_this_turn_ = 0;
};

inline std::string join_documents(const std::vector<std::string>& docs) {
  std::string out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i > 0) out += "\n";
    out += docs[i];
  }
  return out;
}

}  // namespace detail

inline Json final_summary(const Json& memory, LlmBackend* backend, const RunConfig& cfg) {
  if (memory.is_string()) return memory;  // text strategies carry prose already
  if (cfg.output_format == OutputFormat::Json) return memory;
  if (backend == nullptr) return Json(render_text_summary(memory));
  LlmRequest request;
  request.template_id = TemplateId::Finalize;
  request.turn = -1;
  request.temperature = cfg.temperature;
  request.prompt =
      render_prompt(TemplateId::Finalize, {{"existing_summary", compact(memory)}});
  return Json(backend->complete(request).text);
}

// Single-shot baseline: one generation prompt over all documents.
inline RunResult run_generate_once(const std::vector<std::string>& docs, LlmBackend& backend,
                                   const RunConfig& cfg,
                                   const Tokenizer& tokenizer = default_tokenizer()) {
  if (docs.empty()) throw std::invalid_argument("at least one document required");
  detail::PipelineRun run(backend, cfg, tokenizer);
  const std::string everything = detail::join_documents(docs);
  Json snapshot;
  if (strategy_uses_json(cfg.strategy)) {
    snapshot = run.ask_json(run.generate_template(), 0, run.generate_prompt(everything));
  } else {
    snapshot = Json(run.ask(run.generate_template(), 0, run.generate_prompt(everything)).text);
  }
  run.record_turn(0, snapshot, std::nullopt);
  RunResult result = run.take_result();
  result.final_summary = final_summary(snapshot, &backend, cfg);
  return result;
}

// Incremental rewrite baseline: the model re-emits the whole summary with
// every new document.
inline RunResult run_generate_update(const std::vector<std::string>& docs, LlmBackend& backend,
                                     const RunConfig& cfg,
                                     const Tokenizer& tokenizer = default_tokenizer()) {
  if (docs.empty()) throw std::invalid_argument("at least one document required");
  detail::PipelineRun run(backend, cfg, tokenizer);
  const bool json = strategy_uses_json(cfg.strategy);
  Json memory;
  for (std::size_t t = 0; t < docs.size(); ++t) {
    const int turn = static_cast<int>(t);
    if (t == 0) {
      if (json) {
        memory = run.ask_json(run.generate_template(), turn, run.generate_prompt(docs[t]));
      } else {
        memory = Json(run.ask(run.generate_template(), turn, run.generate_prompt(docs[t])).text);
      }
    } else {
      const std::string serialized =
          memory.is_string() ? memory.get<std::string>() : compact(memory);
      if (json) {
        memory = run.ask_json(run.update_template(), turn, run.update_prompt(docs[t], serialized));
      } else {
        memory =
            Json(run.ask(run.update_template(), turn, run.update_prompt(docs[t], serialized)).text);
      }
    }
    if (json) {
      memory = run.apply_budget_json(memory, turn);
    } else {
      memory = Json(run.apply_budget_text(memory.get<std::string>()));
    }
    run.record_turn(turn, memory, std::nullopt);
  }
  RunResult result = run.take_result();
  result.final_summary = final_summary(memory, &backend, cfg);
  return result;
}

// Merge baseline: fresh per-document summary, programmatic key-union merge,
// exact dedup, then an LLM dedup pass.
inline RunResult run_generate_merge(const std::vector<std::string>& docs, LlmBackend& backend,
                                    const RunConfig& cfg,
                                    const Tokenizer& tokenizer = default_tokenizer()) {
  if (docs.empty()) throw std::invalid_argument("at least one document required");
  if (!strategy_uses_json(cfg.strategy)) {
    throw std::invalid_argument("generate-merge requires the json format");
  }
  detail::PipelineRun run(backend, cfg, tokenizer);
  Json memory = empty_summary(cfg.schema);
  for (std::size_t t = 0; t < docs.size(); ++t) {
    const int turn = static_cast<int>(t);
    Json fresh = run.ask_json(run.generate_template(), turn, run.generate_prompt(docs[t]));
    memory = exact_dedup(programmatic_merge(memory, fresh));
    if (cfg.dedup_per_turn) {
      const std::string prompt =
          render_prompt(TemplateId::Dedup, {{"existing_summary", compact(memory)}});
      memory = run.ask_json(TemplateId::Dedup, turn, prompt);
    }
    memory = run.apply_budget_json(memory, turn);
    run.record_turn(turn, memory, std::nullopt);
  }
  if (!cfg.dedup_per_turn) {
    const std::string prompt =
        render_prompt(TemplateId::Dedup, {{"existing_summary", compact(memory)}});
    memory = run.ask_json(TemplateId::Dedup, static_cast<int>(docs.size()) - 1, prompt);
  }
  RunResult result = run.take_result();
  result.final_summary = final_summary(memory, &backend, cfg);
  return result;
}

// Chain-of-key: per-document summary, then LLM-proposed update/add paths
// applied programmatically to the structured memory.
inline RunResult run_chain_of_key(const std::vector<std::string>& docs, LlmBackend& backend,
                                  const RunConfig& cfg,
                                  const Tokenizer& tokenizer = default_tokenizer()) {
  if (docs.empty()) throw std::invalid_argument("at least one document required");
  if (!strategy_uses_json(cfg.strategy)) {
    throw std::invalid_argument("chain-of-key requires the json format");
  }
  detail::PipelineRun run(backend, cfg, tokenizer);
  const std::string question =
      cfg.task == Task::Entity
          ? "Merge the new summary and existing summary of " + cfg.entity_name + "."
          : "Merge the new summary and existing summary of the book.";
  Json memory;
  for (std::size_t t = 0; t < docs.size(); ++t) {
    const int turn = static_cast<int>(t);
    std::optional<PatchOutcome> outcome;
    if (t == 0) {
      memory = run.ask_json(run.generate_template(), turn, run.generate_prompt(docs[t]));
    } else {
      Json fresh = run.ask_json(run.generate_template(), turn, run.generate_prompt(docs[t]));
      const std::string prompt = render_prompt(TemplateId::Cok,
                                               {{"question", question},
                                                {"new_summary", compact(fresh)},
                                                {"class_text", class_text(cfg.schema)},
                                                {"partial_summary", compact(memory)}},
                                               cfg.task);
      LlmResponse response = run.ask(TemplateId::Cok, turn, prompt);
      PatchSet patch;
      try {
        patch = parse_cok_response(response.text);
      } catch (const LlmError&) {
        // One re-ask with the same prompt, then hard error.
        response = run.ask(TemplateId::Cok, turn, prompt);
        try {
          patch = parse_cok_response(response.text);
        } catch (const LlmError& err) {
          throw PipelineError(std::string("unusable chain-of-key reply: ") + err.what());
        }
      }
      auto [patched, patch_outcome] = apply_patch_set(memory, patch, cfg.schema);
      memory = std::move(patched);
      outcome = std::move(patch_outcome);
    }
    memory = run.apply_budget_json(memory, turn);
    run.record_turn(turn, memory, std::move(outcome));
  }
  RunResult result = run.take_result();
  result.final_summary = final_summary(memory, &backend, cfg);
  return result;
}

inline RunResult run_strategy(const std::vector<std::string>& docs, LlmBackend& backend,
                              const RunConfig& cfg,
                              const Tokenizer& tokenizer = default_tokenizer()) {
  switch (cfg.strategy) {
    case Strategy::GoText:
    case Strategy::GoJson:
      return run_generate_once(docs, backend, cfg, tokenizer);
    case Strategy::GuText:
    case Strategy::GuJson:
      return run_generate_update(docs, backend, cfg, tokenizer);
    case Strategy::GmJson:
      return run_generate_merge(docs, backend, cfg, tokenizer);
    case Strategy::CokJson:
      return run_chain_of_key(docs, backend, cfg, tokenizer);
  }
  throw std::logic_error("unknown strategy");
}

}  // namespace incsum
