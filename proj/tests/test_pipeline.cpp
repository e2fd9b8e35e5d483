#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "incsum/dataset.hpp"
#include "incsum/pipeline.hpp"

using incsum::Json;
using incsum::Strategy;

namespace {

const std::string kFixtureDir = INCSUM_FIXTURE_DIR;

struct Fixture {
  incsum::EntityStreamRecord record;
  incsum::Cassette cassette;
  Json expected;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.record = incsum::EntityStreamRecord::from_json(
        incsum::load_json_file(kFixtureDir + "/cafe0.json"));
    out.cassette = incsum::Cassette::load(kFixtureDir + "/cassette.jsonl");
    out.expected = incsum::load_json_file(kFixtureDir + "/expected.json");
    return out;
  }();
  return f;
}

incsum::RunConfig config_for(Strategy strategy) {
  incsum::RunConfig cfg;
  cfg.strategy = strategy;
  cfg.entity_name = "CAFE0";
  cfg.output_format = incsum::strategy_uses_json(strategy) ? incsum::OutputFormat::Json
                                                           : incsum::OutputFormat::Text;
  return cfg;
}

incsum::RunResult replay(Strategy strategy) {
  incsum::ScriptedBackend backend(fixture().cassette);
  return incsum::run_strategy(fixture().record.paragraphs, backend, config_for(strategy));
}

class StubBackend final : public incsum::LlmBackend {
 public:
  explicit StubBackend(std::function<std::string(const incsum::LlmRequest&)> fn)
      : fn_(std::move(fn)) {}
  incsum::LlmResponse complete(const incsum::LlmRequest& request) override {
    ++calls;
    return {fn_(request), {}};
  }
  int calls = 0;

 private:
  std::function<std::string(const incsum::LlmRequest&)> fn_;
};

}  // namespace

TEST_CASE("strategy name round trip") {
  for (Strategy s : incsum::all_strategies()) {
    CHECK(incsum::strategy_from_name(incsum::strategy_name(s)) == s);
  }
  CHECK_FALSE(incsum::strategy_from_name("cok").has_value());
  CHECK(incsum::strategy_uses_json(Strategy::CokJson));
  CHECK_FALSE(incsum::strategy_uses_json(Strategy::GuText));
}

TEST_CASE("fixture replay matches the recorded expectations") {
  for (Strategy strategy : incsum::all_strategies()) {
    const char* name = incsum::strategy_name(strategy);
    INFO(name);
    incsum::RunResult result = replay(strategy);
    CHECK(result.to_json(config_for(strategy)) == fixture().expected[name]);
  }
}

TEST_CASE("fixture replay is byte-deterministic") {
  for (Strategy strategy : {Strategy::CokJson, Strategy::GmJson, Strategy::GuText}) {
    const std::string a =
        incsum::compact(replay(strategy).to_json(config_for(strategy)));
    const std::string b =
        incsum::compact(replay(strategy).to_json(config_for(strategy)));
    CHECK(a == b);
  }
}

TEST_CASE("json snapshots validate against the entity schema at every turn") {
  incsum::Schema schema = incsum::entity_schema();
  for (Strategy strategy : {Strategy::GuJson, Strategy::GmJson, Strategy::CokJson}) {
    INFO(incsum::strategy_name(strategy));
    incsum::RunResult result = replay(strategy);
    REQUIRE(result.turns.size() == 7);
    for (const auto& turn : result.turns) {
      CHECK(incsum::validate(schema, turn.memory_snapshot).valid());
    }
    CHECK(incsum::validate(schema, result.final_summary).valid());
  }
}

TEST_CASE("generate-once issues a single turn") {
  incsum::RunResult result = replay(Strategy::GoJson);
  REQUIRE(result.turns.size() == 1);
  CHECK(result.turns[0].prompts_issued == 1);
  // All eleven facts of the stream end up in the single-shot summary.
  std::size_t values = 0;
  for (const auto& [key, list] : result.final_summary["attributes"].items()) {
    values += list.size();
  }
  CHECK(values == 11);
}

TEST_CASE("generate-update converges to the full gold summary") {
  incsum::RunResult result = replay(Strategy::GuJson);
  REQUIRE(fixture().record.gold_per_turn.has_value());
  for (std::size_t t = 0; t < result.turns.size(); ++t) {
    CHECK(result.turns[t].memory_snapshot == (*fixture().record.gold_per_turn)[t]);
  }
  CHECK(result.final_summary == *fixture().record.gold_final);
}

TEST_CASE("generate-merge dedups per turn and matches gold") {
  incsum::RunResult result = replay(Strategy::GmJson);
  for (std::size_t t = 0; t < result.turns.size(); ++t) {
    // one generate call + one dedup call per turn
    CHECK(result.turns[t].prompts_issued == 2);
    CHECK(result.turns[t].memory_snapshot == (*fixture().record.gold_per_turn)[t]);
  }
}

TEST_CASE("chain-of-key patch outcomes per turn") {
  incsum::RunResult result = replay(Strategy::CokJson);
  REQUIRE(result.turns.size() == 7);
  CHECK_FALSE(result.turns[0].patch_outcome.has_value());

  // updates/adds per turn, derived from which attributes each paragraph
  // shares with the running summary.
  struct Expect {
    int updates;
    int adds;
  };
  const std::vector<Expect> expects = {{1, 1}, {0, 1}, {1, 1}, {0, 1}, {1, 1}, {0, 1}};
  for (std::size_t t = 1; t < 7; ++t) {
    INFO("turn " << t);
    REQUIRE(result.turns[t].patch_outcome.has_value());
    const auto& outcome = *result.turns[t].patch_outcome;
    CHECK(outcome.skipped.empty());
    CHECK(outcome.result_valid);
    int updates = 0, adds = 0;
    for (const auto& applied : outcome.applied) {
      (applied.kind == incsum::PatchKind::Update ? updates : adds)++;
    }
    CHECK(updates == expects[t - 1].updates);
    CHECK(adds == expects[t - 1].adds);
    // memory grows monotonically across turns
    const auto& prev = result.turns[t - 1].memory_snapshot["attributes"];
    const auto& cur = result.turns[t].memory_snapshot["attributes"];
    for (const auto& [key, values] : prev.items()) {
      REQUIRE(cur.contains(key));
      for (const auto& value : values) {
        CHECK(std::find(cur[key].begin(), cur[key].end(), value) != cur[key].end());
      }
    }
  }
  CHECK(result.turns[6].memory_snapshot == *fixture().record.gold_final);
}

TEST_CASE("text strategies carry prose memory") {
  incsum::RunResult go = replay(Strategy::GoText);
  REQUIRE(go.turns.size() == 1);
  CHECK(go.turns[0].memory_snapshot.is_string());
  CHECK(go.final_summary.is_string());

  incsum::RunResult gu = replay(Strategy::GuText);
  REQUIRE(gu.turns.size() == 7);
  for (const auto& turn : gu.turns) CHECK(turn.memory_snapshot.is_string());
}

TEST_CASE("empty document stream is rejected") {
  incsum::ScriptedBackend backend(fixture().cassette);
  incsum::RunConfig cfg = config_for(Strategy::CokJson);
  CHECK_THROWS_AS(incsum::run_strategy({}, backend, cfg), std::invalid_argument);
}

TEST_CASE("merge and chain-of-key require the json format") {
  StubBackend backend([](const incsum::LlmRequest&) { return std::string("{}"); });
  incsum::RunConfig cfg = config_for(Strategy::GuText);
  CHECK_THROWS_AS(incsum::run_generate_merge({"doc"}, backend, cfg), std::invalid_argument);
  CHECK_THROWS_AS(incsum::run_chain_of_key({"doc"}, backend, cfg), std::invalid_argument);
}

TEST_CASE("cassette drift raises a miss instead of replaying stale replies") {
  incsum::ScriptedBackend backend(fixture().cassette);
  incsum::RunConfig cfg = config_for(Strategy::CokJson);
  cfg.entity_name = "CAFE1";  // changes every prompt digest
  CHECK_THROWS_AS(
      incsum::run_strategy(fixture().record.paragraphs, backend, cfg),
      incsum::CassetteMiss);
}

TEST_CASE("unusable replies surface after one retry") {
  StubBackend garbage([](const incsum::LlmRequest&) { return std::string("not json"); });
  incsum::RunConfig cfg = config_for(Strategy::GuJson);
  CHECK_THROWS_AS(incsum::run_generate_update({"doc"}, garbage, cfg),
                  incsum::PipelineError);
  CHECK(garbage.calls == 2);
}

TEST_CASE("token budget caps every snapshot") {
  // The model emits a growing summary and its compression replies are junk,
  // so the deterministic fallback must keep snapshots within budget.
  StubBackend backend([](const incsum::LlmRequest& request) -> std::string {
    if (request.template_id == incsum::TemplateId::Compress) return "cannot comply";
    Json doc = Json::object();
    for (int k = 0; k <= request.turn + 4; ++k) {
      Json values = Json::array();
      for (int v = 0; v < 6; ++v) {
        values.push_back("a reasonably verbose detail string number " + std::to_string(v) +
                         " for key " + std::to_string(k));
      }
      doc["Attribute " + std::to_string(k)] = values;
    }
    return incsum::compact(doc);
  });
  incsum::RunConfig cfg = config_for(Strategy::GuJson);
  cfg.token_budget = 200;
  std::vector<std::string> docs = {"d0", "d1", "d2", "d3"};
  incsum::RunResult result = incsum::run_generate_update(docs, backend, cfg);
  for (const auto& turn : result.turns) {
    CHECK(turn.memory_tokens <= 200);
    CHECK(incsum::validate(incsum::entity_schema(), turn.memory_snapshot).valid());
  }
}

TEST_CASE("text budget truncates to the largest fitting prefix") {
  std::string long_text(4000, 'x');
  StubBackend backend([&](const incsum::LlmRequest&) { return long_text; });
  incsum::RunConfig cfg = config_for(Strategy::GuText);
  cfg.token_budget = 100;
  incsum::RunResult result = incsum::run_generate_update({"d0", "d1"}, backend, cfg);
  for (const auto& turn : result.turns) {
    CHECK(turn.memory_tokens <= 100);
  }
}

TEST_CASE("render_text_summary is flat for entity docs, sectioned for books") {
  std::string flat = incsum::render_text_summary(
      Json::parse(R"({"attributes":{"Service":["friendly","slow"],"Wifi":["free"]}})"));
  CHECK(flat == "Service: friendly; slow\nWifi: free\n");

  std::string sectioned = incsum::render_text_summary(
      Json::parse(R"({"characters":{"Ann":["a nurse"]},"events":{}})"));
  CHECK(sectioned.find("characters:\n  Ann: a nurse") != std::string::npos);
  CHECK(sectioned.find("events:") != std::string::npos);
}

TEST_CASE("run result serialization carries the config echo") {
  incsum::RunConfig cfg = config_for(Strategy::CokJson);
  cfg.token_budget = 300;
  Json out = replay(Strategy::CokJson).to_json(cfg);
  CHECK(out["config"]["strategy"] == "cok_json");
  CHECK(out["config"]["token_budget"] == 300);
  CHECK(out["config"]["temperature"] == 0.8);
  CHECK(out["turns"].size() == 7);
  CHECK(out["turns"][1].contains("patch_outcome"));
}
