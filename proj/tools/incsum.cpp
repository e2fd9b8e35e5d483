// Command-line driver: runs summarization strategies over entity streams or
// book texts, benchmarks them against gold summaries, evaluates run outputs,
// and exposes the chunker.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incsum/dataset.hpp"
#include "incsum/eval.hpp"
#include "incsum/http_backend.hpp"
#include "incsum/pipeline.hpp"

namespace fs = std::filesystem;
using incsum::Json;

namespace {

// Exit codes, one per failure class.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kIoError = 3;
constexpr int kBackendError = 4;
constexpr int kParseError = 5;

struct ExitWith {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw ExitWith{code, message};
}

// --backend http:<url> | scripted:<file> | record:<file> (with --endpoint).
std::shared_ptr<incsum::LlmBackend> make_backend(const std::string& spec,
                                                 const std::string& endpoint) {
  auto http = [](const std::string& url) -> std::shared_ptr<incsum::LlmBackend> {
    const char* token = std::getenv("INCSUM_API_TOKEN");
    return std::make_shared<incsum::HttpBackend>(url, token ? token : "");
  };
  if (spec.rfind("scripted:", 0) == 0) {
    const std::string path = spec.substr(9);
    if (!fs::exists(path)) fail(kConfigError, "cassette not found: " + path);
    return std::make_shared<incsum::ScriptedBackend>(incsum::Cassette::load(path));
  }
  if (spec.rfind("record:", 0) == 0) {
    if (endpoint.empty()) {
      fail(kConfigError, "record: backend needs --endpoint for the inner HTTP backend");
    }
    return std::make_shared<incsum::RecorderBackend>(http(endpoint), spec.substr(7));
  }
  if (spec.rfind("http:", 0) == 0) {
    std::string rest = spec.substr(5);
    return http(rest.find("://") != std::string::npos ? rest : spec);
  }
  fail(kConfigError, "unknown backend spec: " + spec);
}

incsum::Schema load_schema(const std::string& ref) {
  if (ref == "entity") return incsum::entity_schema();
  if (ref == "book") return incsum::book_schema();
  if (!fs::exists(ref)) fail(kConfigError, "schema file not found: " + ref);
  return incsum::schema_from_json(incsum::load_json_file(ref),
                                  fs::path(ref).stem().string());
}

incsum::PairMatcher make_matcher(const std::string& name, incsum::LlmBackend* judge) {
  if (name == "exact") return incsum::exact_matcher();
  if (name == "fuzzy") return incsum::fuzzy_matcher();
  if (name == "llm") {
    if (judge == nullptr) fail(kConfigError, "llm matcher needs --backend");
    return incsum::llm_matcher(*judge);
  }
  fail(kConfigError, "unknown matcher: " + name);
}

void emit(const Json& doc, const std::string& out_path) {
  const std::string text = incsum::pretty(doc) + "\n";
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    incsum::write_file(out_path, text);
  }
}

void stamp(Json& doc, bool deterministic) {
  if (deterministic) return;
  const auto now = std::chrono::system_clock::now();
  doc["generated_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
}

std::vector<incsum::Strategy> parse_strategies(const std::string& spec) {
  if (spec == "all") return incsum::all_strategies();
  std::vector<incsum::Strategy> out;
  std::size_t i = 0;
  while (i <= spec.size()) {
    std::size_t j = spec.find(',', i);
    if (j == std::string::npos) j = spec.size();
    const std::string name = spec.substr(i, j - i);
    auto strategy = incsum::strategy_from_name(name);
    if (!strategy) fail(kConfigError, "unknown strategy: " + name);
    out.push_back(*strategy);
    i = j + 1;
  }
  return out;
}

struct CommonArgs {
  std::string backend_spec;
  std::string endpoint;
  std::string schema_ref = "entity";
  std::string task = "entity";
  std::string out_path;
  double temperature = 0.8;
  std::optional<std::size_t> token_budget;
  std::size_t chunk_limit = 2000;
  bool deterministic = false;
};

// Shared per-command flag wiring.
void add_common(CLI::App* cmd, CommonArgs& args, bool needs_backend) {
  auto* backend = cmd->add_option("--backend", args.backend_spec,
                                  "http:<url> | scripted:<file> | record:<file>");
  if (needs_backend) backend->required();
  cmd->add_option("--endpoint", args.endpoint, "inner HTTP endpoint for record:");
  cmd->add_option("--schema", args.schema_ref, "entity | book | <file>");
  cmd->add_option("--task", args.task, "entity | book")
      ->check(CLI::IsMember({"entity", "book"}));
  cmd->add_option("--temperature", args.temperature);
  cmd->add_option("--token-budget", args.token_budget, "memory token budget K");
  cmd->add_option("--chunk-limit", args.chunk_limit, "book chunk size in tokens");
  cmd->add_option("--out", args.out_path, "output file (stdout when omitted)");
  cmd->add_flag("--deterministic", args.deterministic, "omit timestamps from outputs");
}

incsum::RunConfig build_config(const CommonArgs& args, incsum::Strategy strategy,
                               const std::string& entity_name) {
  incsum::RunConfig cfg;
  cfg.strategy = strategy;
  cfg.schema = load_schema(args.task == "book" && args.schema_ref == "entity"
                               ? "book"
                               : args.schema_ref);
  cfg.output_format = incsum::strategy_uses_json(strategy) ? incsum::OutputFormat::Json
                                                           : incsum::OutputFormat::Text;
  cfg.temperature = args.temperature;
  cfg.token_budget = args.token_budget;
  cfg.chunk_limit = args.chunk_limit;
  cfg.task = args.task == "book" ? incsum::Task::Book : incsum::Task::Entity;
  cfg.entity_name = entity_name;
  return cfg;
}

// Documents for one run: entity records carry paragraphs, books are chunked.
std::vector<std::string> load_documents(const CommonArgs& args, const std::string& in_path,
                                        std::string& entity_name) {
  if (!fs::exists(in_path)) fail(kIoError, "input not found: " + in_path);
  if (args.task == "book") {
    auto chunks = incsum::chunk_document(incsum::default_tokenizer(),
                                         incsum::read_file(in_path), args.chunk_limit);
    std::vector<std::string> docs;
    for (auto& chunk : chunks) docs.push_back(std::move(chunk.text));
    return docs;
  }
  auto record = incsum::EntityStreamRecord::from_json(incsum::load_json_file(in_path));
  if (entity_name.empty()) entity_name = record.entity;
  return record.paragraphs;
}

int cmd_summarize(const CommonArgs& args, const std::string& in_path,
                  const std::string& strategy_name, std::string entity_name) {
  auto strategy = incsum::strategy_from_name(strategy_name);
  if (!strategy) fail(kConfigError, "unknown strategy: " + strategy_name);
  auto backend = make_backend(args.backend_spec, args.endpoint);
  std::vector<std::string> docs;
  try {
    docs = load_documents(args, in_path, entity_name);
  } catch (const std::runtime_error& err) {
    fail(kIoError, err.what());
  }
  incsum::RunConfig cfg = build_config(args, *strategy, entity_name);
  incsum::RunResult result = incsum::run_strategy(docs, *backend, cfg);
  Json out = result.to_json(cfg);
  stamp(out, args.deterministic);
  emit(out, args.out_path);
  return kOk;
}

incsum::EntityMetrics score_doc(const Json& pred, const Json& gold,
                                const incsum::PairMatcher& matcher) {
  return incsum::compute_prf(incsum::match_pairs(incsum::pairs_from_doc(pred),
                                                 incsum::pairs_from_doc(gold), matcher));
}

int cmd_bench(const CommonArgs& args, const std::string& dataset_path,
              const std::string& strategies_spec, const std::string& matcher_name) {
  if (!fs::exists(dataset_path)) fail(kIoError, "dataset not found: " + dataset_path);
  auto strategies = parse_strategies(strategies_spec);
  auto backend = make_backend(args.backend_spec, args.endpoint);
  auto matcher = make_matcher(matcher_name, backend.get());
  std::vector<incsum::EntityStreamRecord> records;
  try {
    records = incsum::load_entity_dataset(dataset_path);
  } catch (const std::runtime_error& err) {
    fail(kParseError, err.what());
  }
  if (records.empty()) fail(kConfigError, "dataset is empty: " + dataset_path);

  Json report = Json::object();
  report["dataset"] = dataset_path;
  report["matcher"] = matcher_name;
  report["strategies"] = Json::object();
  std::string table = "| strategy | point | P | R | F1 |\n|---|---|---|---|---|\n";

  for (incsum::Strategy strategy : strategies) {
    incsum::TurnAggregate macro;
    Json per_entity = Json::array();
    for (const auto& record : records) {
      if (!record.gold_per_turn) {
        fail(kConfigError, "record \"" + record.entity + "\" has no gold_per_turn");
      }
      incsum::RunConfig cfg = build_config(args, strategy, record.entity);
      incsum::RunResult result = incsum::run_strategy(record.paragraphs, *backend, cfg);
      std::vector<incsum::EntityMetrics> series;
      for (std::size_t t = 0; t < result.turns.size(); ++t) {
        const Json& snapshot = result.turns[t].memory_snapshot;
        const Json pred = snapshot.is_string()
                              ? incsum::extract_json(snapshot.get<std::string>())
                              : snapshot;
        // GO has a single turn scored against the final gold.
        const Json& gold = result.turns.size() == 1 ? record.gold_per_turn->back()
                                                    : (*record.gold_per_turn)[t];
        series.push_back(score_doc(pred, gold, matcher));
      }
      incsum::TurnAggregate agg = incsum::aggregate_turns(series);
      per_entity.push_back(Json{{"entity", record.entity}, {"aggregate", agg.to_json()}});
      macro.start.precision += agg.start.precision;
      macro.start.recall += agg.start.recall;
      macro.start.f1 += agg.start.f1;
      macro.last.precision += agg.last.precision;
      macro.last.recall += agg.last.recall;
      macro.last.f1 += agg.last.f1;
      macro.avg.precision += agg.avg.precision;
      macro.avg.recall += agg.avg.recall;
      macro.avg.f1 += agg.avg.f1;
    }
    const double n = static_cast<double>(records.size());
    for (incsum::EntityMetrics* m : {&macro.start, &macro.last, &macro.avg}) {
      m->precision /= n;
      m->recall /= n;
      m->f1 /= n;
    }
    const char* name = incsum::strategy_name(strategy);
    report["strategies"][name] =
        Json{{"macro", macro.to_json()}, {"per_entity", per_entity}};
    for (auto [point, m] : {std::pair{"start", &macro.start}, {"last", &macro.last},
                            {"avg", &macro.avg}}) {
      char row[160];
      std::snprintf(row, sizeof(row), "| %s | %s | %.3f | %.3f | %.3f |\n", name, point,
                    m->precision, m->recall, m->f1);
      table += row;
    }
  }
  report["table"] = table;
  stamp(report, args.deterministic);
  emit(report, args.out_path);
  return kOk;
}

int cmd_eval(const CommonArgs& args, const std::string& run_path,
             const std::string& gold_path, const std::string& matcher_name) {
  if (!fs::exists(run_path)) fail(kIoError, "run file not found: " + run_path);
  Json run;
  try {
    run = incsum::load_json_file(run_path);
  } catch (const std::runtime_error& err) {
    fail(kParseError, err.what());
  }

  if (args.task == "book") {
    if (args.backend_spec.empty()) {
      fail(kConfigError, "book coherence evaluation needs an evaluator --backend");
    }
    auto backend = make_backend(args.backend_spec, args.endpoint);
    if (!run.contains("final_summary") || !run["final_summary"].is_string()) {
      fail(kParseError, "run file has no text final_summary");
    }
    auto report =
        incsum::coherence_eval(run["final_summary"].get<std::string>(), *backend,
                               args.temperature);
    Json out = report.to_json();
    stamp(out, args.deterministic);
    emit(out, args.out_path);
    std::fprintf(stderr, "coherence_score %.4f (confusion %.4f over %zu sentences)\n",
                 report.coherence_score, report.confusion_ratio, report.sentences.size());
    return kOk;
  }

  if (gold_path.empty()) fail(kConfigError, "entity evaluation needs --gold");
  if (!fs::exists(gold_path)) fail(kIoError, "gold file not found: " + gold_path);
  std::shared_ptr<incsum::LlmBackend> judge;
  if (!args.backend_spec.empty()) judge = make_backend(args.backend_spec, args.endpoint);
  auto matcher = make_matcher(matcher_name, judge.get());

  Json gold = incsum::load_json_file(gold_path);
  std::vector<Json> gold_per_turn;
  if (gold.is_object() && gold.contains("gold_per_turn")) {
    for (const auto& g : gold["gold_per_turn"]) gold_per_turn.push_back(g);
  }
  if (!run.contains("turns") || !run["turns"].is_array() || run["turns"].empty()) {
    fail(kParseError, "run file has no turns");
  }

  std::vector<incsum::EntityMetrics> series;
  Json per_turn = Json::array();
  for (std::size_t t = 0; t < run["turns"].size(); ++t) {
    const Json& snapshot = run["turns"][t]["memory"];
    Json pred;
    try {
      pred = snapshot.is_string() ? incsum::extract_json(snapshot.get<std::string>())
                                  : snapshot;
    } catch (const incsum::LlmError& err) {
      fail(kParseError, std::string("turn snapshot is not JSON: ") + err.what());
    }
    const Json& turn_gold =
        !gold_per_turn.empty()
            ? gold_per_turn[std::min(t, gold_per_turn.size() - 1)]
            : (gold.is_object() && gold.contains("gold_final") ? gold["gold_final"] : gold);
    incsum::EntityMetrics metrics = score_doc(pred, turn_gold, matcher);
    series.push_back(metrics);
    per_turn.push_back(Json{{"turn", t}, {"metrics", metrics.to_json()}});
  }
  incsum::TurnAggregate agg = incsum::aggregate_turns(series);
  Json out = Json{{"per_turn", per_turn}, {"aggregate", agg.to_json()}};
  stamp(out, args.deterministic);
  emit(out, args.out_path);
  std::fprintf(stderr, "avg P %.4f R %.4f F1 %.4f\n", agg.avg.precision, agg.avg.recall,
               agg.avg.f1);
  return kOk;
}

int cmd_chunk(const std::string& in_path, std::size_t limit, const std::string& out_path) {
  if (!fs::exists(in_path)) fail(kIoError, "input not found: " + in_path);
  const std::string text = incsum::read_file(in_path);
  auto chunks = incsum::chunk_document(incsum::default_tokenizer(), text, limit);
  Json out = Json::array();
  for (const auto& chunk : chunks) {
    out.push_back(Json{
        {"index", chunk.index}, {"tokens", chunk.token_count}, {"text", chunk.text}});
  }
  emit(out, out_path);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental structured summarization over document streams"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* summarize = app.add_subcommand("summarize", "run one stream under a strategy");
  std::string in_path, strategy = "cok_json", entity_name;
  summarize->add_option("--in", in_path, "entity record JSON or book text")->required();
  summarize->add_option("--strategy", strategy,
                        "go_text|go_json|gu_text|gu_json|gm_json|cok_json");
  summarize->add_option("--entity", entity_name, "entity name override");
  add_common(summarize, common, /*needs_backend=*/true);

  auto* bench = app.add_subcommand("bench", "run a dataset under strategies and score it");
  std::string dataset_path, strategies = "all", matcher = "exact";
  bench->add_option("--dataset", dataset_path, "JSONL of entity stream records")->required();
  bench->add_option("--strategies", strategies, "comma list or \"all\"");
  bench->add_option("--matcher", matcher, "exact|fuzzy|llm");
  add_common(bench, common, /*needs_backend=*/true);

  auto* eval = app.add_subcommand("eval", "score a run output");
  std::string run_path, gold_path, eval_matcher = "exact";
  eval->add_option("--run", run_path, "RunResult JSON")->required();
  eval->add_option("--gold", gold_path, "gold doc or record (entity task)");
  eval->add_option("--matcher", eval_matcher, "exact|fuzzy|llm");
  add_common(eval, common, /*needs_backend=*/false);

  auto* chunk = app.add_subcommand("chunk", "split a text into token-bounded chunks");
  std::string chunk_in, chunk_out;
  std::size_t chunk_limit = 2000;
  chunk->add_option("--in", chunk_in, "text file")->required();
  chunk->add_option("--limit", chunk_limit, "max tokens per chunk");
  chunk->add_option("--out", chunk_out, "output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (summarize->parsed()) return cmd_summarize(common, in_path, strategy, entity_name);
    if (bench->parsed()) return cmd_bench(common, dataset_path, strategies, matcher);
    if (eval->parsed()) return cmd_eval(common, run_path, gold_path, eval_matcher);
    if (chunk->parsed()) return cmd_chunk(chunk_in, chunk_limit, chunk_out);
  } catch (const ExitWith& exit) {
    std::fprintf(stderr, "error: %s\n", exit.message.c_str());
    return exit.code;
  } catch (const incsum::CassetteMiss& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kBackendError;
  } catch (const incsum::PipelineError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kParseError;
  } catch (const incsum::LlmError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kBackendError;
  } catch (const std::runtime_error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kIoError;
  }
  return kConfigError;
}
