#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "incsum/json.hpp"

namespace incsum {

// One entity stream: the paragraphs to ingest plus optional gold summaries
// (cumulative, one per turn) and a final gold doc.
struct EntityStreamRecord {
  std::string entity;
  std::vector<std::string> paragraphs;
  std::optional<std::vector<Json>> gold_per_turn;
  std::optional<Json> gold_final;

  static EntityStreamRecord from_json(const Json& record) {
    if (!record.is_object() || !record.contains("entity") || !record.contains("paragraphs")) {
      throw std::runtime_error("entity record needs \"entity\" and \"paragraphs\"");
    }
    EntityStreamRecord out;
    out.entity = record["entity"].get<std::string>();
    for (const auto& p : record["paragraphs"]) out.paragraphs.push_back(p.get<std::string>());
    if (record.contains("gold_per_turn")) {
      std::vector<Json> gold;
      for (const auto& g : record["gold_per_turn"]) gold.push_back(g);
      if (gold.size() != out.paragraphs.size()) {
        throw std::runtime_error("record \"" + out.entity +
                                 "\": gold_per_turn length does not match paragraph count");
      }
      out.gold_per_turn = std::move(gold);
    }
    if (record.contains("gold_final")) out.gold_final = record["gold_final"];
    return out;
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

inline Json load_json_file(const std::string& path) {
  Json doc = Json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error("invalid JSON in " + path);
  return doc;
}

// JSON-lines dataset of entity stream records.
inline std::vector<EntityStreamRecord> load_entity_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<EntityStreamRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json record = Json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      throw std::runtime_error("invalid JSON on line " + std::to_string(lineno) + " of " + path);
    }
    records.push_back(EntityStreamRecord::from_json(record));
  }
  return records;
}

}  // namespace incsum
