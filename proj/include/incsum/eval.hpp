#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "incsum/json.hpp"
#include "incsum/llm.hpp"
#include "incsum/prompts.hpp"

namespace incsum {

struct AttrValuePair {
  std::string attribute;
  std::string value;

  bool operator==(const AttrValuePair&) const = default;
};

// Flattens {"attributes": {"A": ["x","y"]}} (or a bare attribute map, or a
// multi-section book doc) into attribute/value pairs.
inline std::vector<AttrValuePair> pairs_from_doc(const Json& doc) {
  std::vector<AttrValuePair> pairs;
  std::function<void(const Json&)> walk = [&](const Json& node) {
    if (!node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
      if (value.is_array()) {
        for (const auto& element : value) {
          if (element.is_string()) pairs.push_back({key, element.get<std::string>()});
        }
      } else if (value.is_object()) {
        walk(value);
      } else if (value.is_string()) {
        pairs.push_back({key, value.get<std::string>()});
      }
    }
  };
  walk(doc);
  return pairs;
}

struct MatchResult {
  std::vector<std::pair<AttrValuePair, AttrValuePair>> matched;  // (pred, gold)
  std::vector<AttrValuePair> unmatched_pred;
  std::vector<AttrValuePair> unmatched_gold;
};

namespace detail {

inline std::string normalize_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

inline std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> tokens;
  std::string normalized = normalize_text(text);
  std::size_t i = 0;
  while (i < normalized.size()) {
    std::size_t j = normalized.find(' ', i);
    if (j == std::string::npos) j = normalized.size();
    if (j > i) tokens.insert(normalized.substr(i, j - i));
    i = j + 1;
  }
  return tokens;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace detail

// A matcher scores a predicted pair against a gold pair in [0,1];
// 0 means no match.
using PairMatcher = std::function<double(const AttrValuePair&, const AttrValuePair&)>;

// Case- and whitespace-insensitive equality.
inline PairMatcher exact_matcher() {
  return [](const AttrValuePair& pred, const AttrValuePair& gold) {
    return detail::normalize_text(pred.attribute) == detail::normalize_text(gold.attribute) &&
                   detail::normalize_text(pred.value) == detail::normalize_text(gold.value)
               ? 1.0
               : 0.0;
  };
}

// Token-Jaccard >= 0.5 on both the attribute and the value.
inline PairMatcher fuzzy_matcher() {
  return [](const AttrValuePair& pred, const AttrValuePair& gold) {
    const double attr = detail::jaccard(detail::token_set(pred.attribute),
                                        detail::token_set(gold.attribute));
    const double value =
        detail::jaccard(detail::token_set(pred.value), detail::token_set(gold.value));
    if (attr < 0.5 || value < 0.5) return 0.0;
    return (attr + value) / 2.0;
  };
}

// Asks a judge model whether two pairs describe the same fact. The reply
// must contain a JSON object {"match": true|false}.
inline PairMatcher llm_matcher(LlmBackend& backend, double temperature = 0.8) {
  return [&backend, temperature](const AttrValuePair& pred, const AttrValuePair& gold) {
    LlmRequest request;
    request.template_id = TemplateId::Coherence;  // judge-style call
    request.turn = -1;
    request.temperature = temperature;
    request.prompt =
        "Do the following two attribute-value pairs describe the same fact about the "
        "entity? Reply with a JSON object {\"match\": true or false}.\n"
        "Pair A: " + pred.attribute + " = " + pred.value + "\n" +
        "Pair B: " + gold.attribute + " = " + gold.value + "\n";
    Json verdict = extract_json(backend.complete(request).text);
    return verdict.value("match", false) ? 1.0 : 0.0;
  };
}

// Greedy one-to-one matching: predicted pairs in order, each takes its
// best-scoring unused gold candidate (first such candidate on ties).
inline MatchResult match_pairs(const std::vector<AttrValuePair>& pred,
                               const std::vector<AttrValuePair>& gold,
                               const PairMatcher& matcher) {
  MatchResult result;
  std::vector<bool> gold_used(gold.size(), false);
  for (const auto& p : pred) {
    double best_score = 0.0;
    std::size_t best_index = gold.size();
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (gold_used[g]) continue;
      const double score = matcher(p, gold[g]);
      if (score > best_score) {
        best_score = score;
        best_index = g;
      }
    }
    if (best_index < gold.size()) {
      gold_used[best_index] = true;
      result.matched.emplace_back(p, gold[best_index]);
    } else {
      result.unmatched_pred.push_back(p);
    }
  }
  for (std::size_t g = 0; g < gold.size(); ++g) {
    if (!gold_used[g]) result.unmatched_gold.push_back(gold[g]);
  }
  return result;
}

struct EntityMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  Json to_json() const {
    return Json{{"precision", precision}, {"recall", recall}, {"f1", f1}};
  }
};

// P undefined on empty predictions and R undefined on empty gold are both
// pinned to 0.
inline EntityMetrics compute_prf(const MatchResult& match) {
  EntityMetrics metrics;
  const double matched = static_cast<double>(match.matched.size());
  const double pred_total = matched + static_cast<double>(match.unmatched_pred.size());
  const double gold_total = matched + static_cast<double>(match.unmatched_gold.size());
  metrics.precision = pred_total > 0 ? matched / pred_total : 0.0;
  metrics.recall = gold_total > 0 ? matched / gold_total : 0.0;
  const double pr = metrics.precision + metrics.recall;
  metrics.f1 = pr > 0 ? 2.0 * metrics.precision * metrics.recall / pr : 0.0;
  return metrics;
}

struct TurnAggregate {
  EntityMetrics start;
  EntityMetrics last;
  EntityMetrics avg;

  Json to_json() const {
    return Json{{"start", start.to_json()}, {"last", last.to_json()}, {"avg", avg.to_json()}};
  }
};

inline TurnAggregate aggregate_turns(const std::vector<EntityMetrics>& series) {
  if (series.empty()) throw std::invalid_argument("empty metric series");
  TurnAggregate agg;
  agg.start = series.front();
  agg.last = series.back();
  for (const auto& m : series) {
    agg.avg.precision += m.precision;
    agg.avg.recall += m.recall;
    agg.avg.f1 += m.f1;
  }
  const double n = static_cast<double>(series.size());
  agg.avg.precision /= n;
  agg.avg.recall /= n;
  agg.avg.f1 /= n;
  return agg;
}

// Sentence split on ./!/? followed by whitespace, guarding common
// abbreviations and single-letter initials.
inline std::vector<std::string> split_sentences(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty text");
  static const std::vector<std::string> kAbbreviations = {
      "Mr", "Mrs", "Ms", "Dr", "Prof", "St", "etc", "e.g", "i.e", "vs",
  };
  auto ends_with_abbreviation = [&](std::string_view upto) {
    // upto excludes the period itself.
    for (const auto& abbr : kAbbreviations) {
      if (upto.size() >= abbr.size() &&
          upto.substr(upto.size() - abbr.size()) == abbr &&
          (upto.size() == abbr.size() ||
           !std::isalpha(static_cast<unsigned char>(upto[upto.size() - abbr.size() - 1])))) {
        return true;
      }
    }
    // Single-letter initial, e.g. "A." in "A. B went home."
    if (!upto.empty() && std::isupper(static_cast<unsigned char>(upto.back())) &&
        (upto.size() == 1 ||
         !std::isalpha(static_cast<unsigned char>(upto[upto.size() - 2])))) {
      return true;
    }
    return false;
  };

  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
        std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      if (c == '.' && ends_with_abbreviation(text.substr(start, i - start))) continue;
      std::string sentence(text.substr(start, i + 1 - start));
      // trim leading whitespace
      std::size_t lead = sentence.find_first_not_of(" \t\n\r");
      if (lead != std::string::npos && lead > 0) sentence.erase(0, lead);
      if (!sentence.empty()) sentences.push_back(std::move(sentence));
      start = i + 1;
    }
  }
  if (start < text.size()) {
    std::string tail(text.substr(start));
    std::size_t lead = tail.find_first_not_of(" \t\n\r");
    if (lead == std::string::npos) {
      // trailing whitespace only
    } else {
      if (lead > 0) tail.erase(0, lead);
      while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.back()))) {
        tail.pop_back();
      }
      if (!tail.empty()) sentences.push_back(std::move(tail));
    }
  }
  if (sentences.empty()) throw std::invalid_argument("text has no sentences");
  return sentences;
}

inline const std::vector<std::string>& coherence_dimensions() {
  static const std::vector<std::string> kDimensions = {
      "entity omission", "event omission",  "causal omission", "salience",
      "discontinuity",   "duplication",     "inconsistency",   "language",
  };
  return kDimensions;
}

struct CoherenceReport {
  struct Sentence {
    std::string text;
    bool confusing = false;
    std::vector<std::string> dimensions;
  };
  std::vector<Sentence> sentences;
  double confusion_ratio = 0.0;
  double coherence_score = 0.0;

  Json to_json() const {
    Json out = Json::object();
    out["sentences"] = Json::array();
    for (const auto& s : sentences) {
      out["sentences"].push_back(
          Json{{"text", s.text}, {"confusing", s.confusing}, {"dimensions", s.dimensions}});
    }
    out["confusion_ratio"] = confusion_ratio;
    out["coherence_score"] = coherence_score;
    return out;
  }
};

// Per-sentence judge calls over the eight error dimensions; the headline
// score is 1 - confusing/total (higher is better).
inline CoherenceReport coherence_eval(const std::string& summary_text, LlmBackend& backend,
                                      double temperature = 0.8) {
  CoherenceReport report;
  const auto sentences = split_sentences(summary_text);
  std::size_t confusing = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    LlmRequest request;
    request.template_id = TemplateId::Coherence;
    request.turn = static_cast<int>(i);
    request.temperature = temperature;
    request.prompt = render_prompt(TemplateId::Coherence, {{"existing_summary", summary_text},
                                                           {"question", sentences[i]}});
    Json verdict;
    try {
      verdict = extract_json(backend.complete(request).text);
    } catch (const LlmError&) {
      verdict = extract_json(backend.complete(request).text);  // one retry
    }
    CoherenceReport::Sentence entry;
    entry.text = sentences[i];
    entry.confusing = verdict.value("confusing", false);
    if (verdict.contains("dimensions") && verdict["dimensions"].is_array()) {
      for (const auto& d : verdict["dimensions"]) {
        if (d.is_string()) entry.dimensions.push_back(d.get<std::string>());
      }
    }
    if (entry.confusing) ++confusing;
    report.sentences.push_back(std::move(entry));
  }
  report.confusion_ratio =
      static_cast<double>(confusing) / static_cast<double>(sentences.size());
  report.coherence_score = 1.0 - report.confusion_ratio;
  return report;
}

}  // namespace incsum
