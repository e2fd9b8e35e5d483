#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "incsum/dataset.hpp"
#include "incsum/json.hpp"

namespace fs = std::filesystem;
using incsum::Json;

namespace {

const std::string kCli = INCSUM_CLI_PATH;
const std::string kFixtureDir = INCSUM_FIXTURE_DIR;

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "incsum_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string command = kCli + " " + args + " >/dev/null 2>&1";
  int status = std::system(command.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string scripted() { return "scripted:" + kFixtureDir + "/cassette.jsonl"; }

}  // namespace

TEST_CASE("summarize replays the fixture deterministically") {
  const fs::path out1 = work_dir() / "run1.json";
  const fs::path out2 = work_dir() / "run2.json";
  const std::string base = "summarize --in " + kFixtureDir + "/cafe0.json" +
                           " --strategy cok_json --backend " + scripted() +
                           " --deterministic --out ";
  REQUIRE(run_cli(base + out1.string()) == 0);
  REQUIRE(run_cli(base + out2.string()) == 0);
  CHECK(incsum::read_file(out1.string()) == incsum::read_file(out2.string()));

  Json run = incsum::load_json_file(out1.string());
  Json expected = incsum::load_json_file(kFixtureDir + "/expected.json");
  CHECK(run == expected["cok_json"]);
}

TEST_CASE("summarize covers every strategy from the cassette") {
  for (const char* name : {"go_text", "go_json", "gu_text", "gu_json", "gm_json"}) {
    INFO(name);
    const fs::path out = work_dir() / (std::string(name) + ".json");
    CHECK(run_cli("summarize --in " + kFixtureDir + "/cafe0.json --strategy " + name +
                  " --backend " + scripted() + " --deterministic --out " + out.string()) == 0);
    CHECK(incsum::load_json_file(out.string())["config"]["strategy"] == name);
  }
}

TEST_CASE("exit codes distinguish failure classes") {
  const std::string in = kFixtureDir + "/cafe0.json";
  // config: missing cassette file
  CHECK(run_cli("summarize --in " + in + " --backend scripted:/nonexistent.jsonl") == 2);
  // config: unknown strategy
  CHECK(run_cli("summarize --in " + in + " --strategy bogus --backend " + scripted()) == 2);
  // config: record backend without endpoint
  CHECK(run_cli("summarize --in " + in + " --backend record:/tmp/r.jsonl") == 2);
  // I/O: missing input
  CHECK(run_cli("summarize --in /nonexistent.json --backend " + scripted()) == 3);
  // backend: cassette miss from a drifted prompt
  CHECK(run_cli("summarize --in " + in + " --entity CAFE1 --strategy cok_json --backend " +
                scripted()) == 4);
  // config: book eval without an evaluator backend
  const fs::path run = work_dir() / "for_eval.json";
  REQUIRE(run_cli("summarize --in " + in + " --strategy cok_json --backend " + scripted() +
                  " --deterministic --out " + run.string()) == 0);
  CHECK(run_cli("eval --task book --run " + run.string()) == 2);
  // parse: malformed dataset line
  const fs::path bad = work_dir() / "bad.jsonl";
  incsum::write_file(bad.string(), "{\"entity\":\"X\"}\n");
  CHECK(run_cli("bench --dataset " + bad.string() + " --backend " + scripted()) == 5);
}

TEST_CASE("eval scores a run against the fixture gold") {
  const fs::path run = work_dir() / "eval_run.json";
  const fs::path metrics = work_dir() / "metrics.json";
  REQUIRE(run_cli("summarize --in " + kFixtureDir + "/cafe0.json --strategy cok_json" +
                  " --backend " + scripted() + " --deterministic --out " + run.string()) == 0);
  REQUIRE(run_cli("eval --run " + run.string() + " --gold " + kFixtureDir +
                  "/cafe0.json --matcher exact --deterministic --out " +
                  metrics.string()) == 0);
  Json report = incsum::load_json_file(metrics.string());
  REQUIRE(report["per_turn"].size() == 7);
  // The simulated model reproduces the gold exactly, so P = R = F1 = 1.
  CHECK(report["aggregate"]["avg"]["f1"] == 1.0);
  CHECK(report["aggregate"]["start"]["precision"] == 1.0);
  CHECK(report["aggregate"]["last"]["recall"] == 1.0);
}

TEST_CASE("bench produces the table-shaped report") {
  const fs::path report_path = work_dir() / "bench.json";
  REQUIRE(run_cli("bench --dataset " + kFixtureDir + "/cafe0.jsonl" +
                  " --strategies gu_json,cok_json --matcher exact --backend " + scripted() +
                  " --deterministic --out " + report_path.string()) == 0);
  Json report = incsum::load_json_file(report_path.string());
  REQUIRE(report["strategies"].size() == 2);
  for (const char* name : {"gu_json", "cok_json"}) {
    INFO(name);
    REQUIRE(report["strategies"].contains(name));
    CHECK(report["strategies"][name]["macro"]["avg"]["f1"] == 1.0);
  }
  const std::string table = report["table"].get<std::string>();
  CHECK(table.find("| gu_json | start |") != std::string::npos);
  CHECK(table.find("| cok_json | avg |") != std::string::npos);
}

TEST_CASE("chunk splits and reports token counts") {
  const fs::path input = work_dir() / "book.txt";
  std::string text;
  for (int i = 0; i < 200; ++i) text += "word" + std::to_string(i % 10) + " ";
  incsum::write_file(input.string(), text);
  const fs::path out = work_dir() / "chunks.json";
  REQUIRE(run_cli("chunk --in " + input.string() + " --limit 50 --out " + out.string()) == 0);
  Json chunks = incsum::load_json_file(out.string());
  REQUIRE(chunks.size() > 1);
  std::string reassembled;
  for (const auto& chunk : chunks) {
    CHECK(chunk["tokens"].get<std::size_t>() <= 50);
    reassembled += chunk["text"].get<std::string>();
  }
  CHECK(reassembled == text);
}
