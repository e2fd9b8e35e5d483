// Generates the shipped synthetic entity fixture: a 7-paragraph stream for
// entity CAFE0, a cassette covering all six strategies, and the expected run
// outputs. The simulated model is deterministic, so regenerating the fixture
// is byte-stable.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "incsum/dataset.hpp"
#include "incsum/llm.hpp"
#include "incsum/pipeline.hpp"

namespace fs = std::filesystem;
using incsum::Json;

namespace {

struct Fact {
  int paragraph;
  std::string attribute;
  std::string value;
};

const std::vector<std::string> kParagraphs = {
    "CAFE0 pulls a rich espresso with a smooth crema, and the corner room has "
    "plenty of window seats for people-watching.",
    "The beans at CAFE0 are single-origin and roasted weekly; the baristas "
    "remember regulars' orders without being asked.",
    "The croissants at CAFE0 are flaky and baked on site every morning.",
    "CAFE0 offers fast and free wifi, though the queue gets long at lunchtime "
    "and service slows down.",
    "Mornings at CAFE0 are quiet enough to read a book in peace.",
    "CAFE0 now sells seasonal fruit tarts, and the shop sits two blocks from "
    "the riverfront.",
    "On weekends CAFE0 stays open until 9pm for the evening crowd.",
};

const std::vector<Fact> kFacts = {
    {0, "Coffee Quality", "rich espresso with a smooth crema"},
    {0, "Seating", "plenty of window seats"},
    {1, "Coffee Quality", "single-origin beans roasted weekly"},
    {1, "Service", "baristas remember regulars' orders"},
    {2, "Pastries", "flaky croissants baked on site every morning"},
    {3, "Wifi", "fast and free wifi"},
    {3, "Service", "long queue at lunchtime slows service"},
    {4, "Noise Level", "quiet mornings"},
    {5, "Pastries", "seasonal fruit tarts"},
    {5, "Location", "two blocks from the riverfront"},
    {6, "Opening Hours", "open until 9pm on weekends"},
};

// Bare attribute map for a set of paragraph indices, facts in table order.
Json summary_for(const std::vector<int>& indices) {
  Json out = Json::object();
  for (const auto& fact : kFacts) {
    bool wanted = false;
    for (int index : indices) {
      if (fact.paragraph == index) wanted = true;
    }
    if (!wanted) continue;
    if (!out.contains(fact.attribute)) out[fact.attribute] = Json::array();
    out[fact.attribute].push_back(fact.value);
  }
  return out;
}

Json cumulative(int upto) {
  std::vector<int> indices;
  for (int i = 0; i <= upto; ++i) indices.push_back(i);
  return summary_for(indices);
}

Json json_after(const std::string& prompt, const std::string& marker) {
  std::size_t pos = prompt.rfind(marker);
  if (pos == std::string::npos) throw std::runtime_error("marker not found: " + marker);
  return incsum::extract_json(std::string_view(prompt).substr(pos + marker.size()));
}

// Deterministic stand-in for a model: inspects the prompt and answers with
// the facts the relevant paragraphs carry.
class SimulatedBackend final : public incsum::LlmBackend {
 public:
  incsum::LlmResponse complete(const incsum::LlmRequest& request) override {
    switch (request.template_id) {
      case incsum::TemplateId::GenerateEntity: {
        std::vector<int> present;
        for (std::size_t i = 0; i < kParagraphs.size(); ++i) {
          if (request.prompt.find(kParagraphs[i]) != std::string::npos) {
            present.push_back(static_cast<int>(i));
          }
        }
        return {"Here is the summary JSON for CAFE0:\n\n" +
                    incsum::pretty(summary_for(present)) + "\n",
                {}};
      }
      case incsum::TemplateId::UpdateEntity: {
        int latest = 0;
        for (std::size_t i = 0; i < kParagraphs.size(); ++i) {
          if (request.prompt.find(kParagraphs[i]) != std::string::npos) {
            latest = static_cast<int>(i);
          }
        }
        return {"Updated summary JSON:\n\n" + incsum::pretty(cumulative(latest)) + "\n", {}};
      }
      case incsum::TemplateId::Dedup: {
        Json existing = json_after(request.prompt, "Given Existing Summary:");
        return {incsum::pretty(incsum::exact_dedup(existing)) + "\n", {}};
      }
      case incsum::TemplateId::Cok:
        return {cok_reply(request.prompt), {}};
      default:
        throw std::runtime_error(std::string("unexpected template: ") +
                                 incsum::template_name(request.template_id));
    }
  }

 private:
  static std::string cok_reply(const std::string& prompt) {
    Json fresh = json_after(prompt, "[NEW SUMMARY]");
    Json partial = json_after(prompt, "[PARTIAL SUMMARY]");
    const Json& fresh_map = fresh.contains("attributes") ? fresh["attributes"] : fresh;
    const Json& partial_map =
        partial.contains("attributes") ? partial["attributes"] : partial;

    Json updates = Json::object();
    Json adds = Json::object();
    for (const auto& [key, values] : fresh_map.items()) {
      const std::string path = "$.'attributes'.'" + key + "'";
      (partial_map.contains(key) ? updates : adds)[path] = values;
    }

    std::string reply = "[THOUGHTS FOR UPDATE]\nComparing keys of the two summaries.\n\n";
    reply += "[UPDATED OBJECTS]\n{";
    bool first = true;
    for (const auto& [path, values] : updates.items()) {
      reply += first ? "\n" : ",\n";
      reply += "  \"" + path + "\": {\"update\": " + incsum::compact(values) + "}";
      first = false;
    }
    reply += first ? "}\n\n" : "\n}\n\n";
    reply += "[THOUGHTS FOR ADD]\nNew keys get added.\n\n[ADDED OBJECTS]\n{";
    first = true;
    for (const auto& [path, values] : adds.items()) {
      reply += first ? "\n" : ",\n";
      reply += "  \"" + path + "\": {\"add\": " + incsum::compact(values) + "}";
      first = false;
    }
    reply += first ? "}\n" : "\n}\n";
    return reply;
  }
};

Json dataset_record() {
  Json record = Json::object();
  record["entity"] = "CAFE0";
  record["paragraphs"] = kParagraphs;
  record["gold_per_turn"] = Json::array();
  for (int t = 0; t < static_cast<int>(kParagraphs.size()); ++t) {
    record["gold_per_turn"].push_back(Json{{"attributes", cumulative(t)}});
  }
  record["gold_final"] =
      Json{{"attributes", cumulative(static_cast<int>(kParagraphs.size()) - 1)}};
  return record;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(dir);

  const Json record = dataset_record();
  incsum::write_file((dir / "cafe0.json").string(), incsum::pretty(record) + "\n");
  incsum::write_file((dir / "cafe0.jsonl").string(), incsum::compact(record) + "\n");

  const fs::path cassette_path = dir / "cassette.jsonl";
  std::ofstream(cassette_path, std::ios::trunc).close();
  auto simulated = std::make_shared<SimulatedBackend>();
  incsum::RecorderBackend recorder(simulated, cassette_path.string());

  Json expected = Json::object();
  for (incsum::Strategy strategy : incsum::all_strategies()) {
    incsum::RunConfig cfg;
    cfg.strategy = strategy;
    cfg.entity_name = "CAFE0";
    cfg.task = incsum::Task::Entity;
    cfg.output_format = incsum::strategy_uses_json(strategy) ? incsum::OutputFormat::Json
                                                             : incsum::OutputFormat::Text;
    incsum::RunResult result = incsum::run_strategy(kParagraphs, recorder, cfg);
    expected[incsum::strategy_name(strategy)] = result.to_json(cfg);
  }
  incsum::write_file((dir / "expected.json").string(), incsum::pretty(expected) + "\n");

  std::printf("fixture written to %s\n", dir.string().c_str());
  return 0;
}
