#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "incsum/patch.hpp"
#include "incsum/path.hpp"
#include "incsum/schema.hpp"

using incsum::Json;
using incsum::JsonPath;
using incsum::PatchKind;
using incsum::PatchSet;
using incsum::SkipReason;

namespace {

// Independent oracle for resolve: plain recursive descent.
const Json* naive_lookup(const Json& doc, const std::vector<std::string>& segments,
                         std::size_t i = 0) {
  if (i == segments.size()) return &doc;
  if (!doc.is_object()) return nullptr;
  for (const auto& [key, value] : doc.items()) {
    if (key == segments[i]) return naive_lookup(value, segments, i + 1);
  }
  return nullptr;
}

std::string random_key(std::mt19937& rng) {
  static const std::vector<std::string> pool = {
      "Amenities", "Noise Level", "Food & Beverage", "a'b", "x\\y", "_k", "k2", "Views"};
  return pool[rng() % pool.size()];
}

Json random_doc(std::mt19937& rng, int depth) {
  if (depth == 0 || rng() % 3 == 0) {
    if (rng() % 2 == 0) return "leaf" + std::to_string(rng() % 10);
    Json list = Json::array();
    for (std::size_t i = 0, n = rng() % 3; i < n; ++i) list.push_back("v" + std::to_string(rng() % 10));
    return list;
  }
  Json out = Json::object();
  std::size_t width = rng() % 8;
  for (std::size_t i = 0; i < width; ++i) out[random_key(rng)] = random_doc(rng, depth - 1);
  return out;
}

// All (rendered path, leaf string) pairs in a doc; the monotonicity unit.
void collect_leaves(const Json& doc, std::vector<std::string>& segments,
                    std::multiset<std::pair<std::string, std::string>>& out) {
  if (doc.is_string()) {
    out.emplace(incsum::render_path(segments), doc.get<std::string>());
  } else if (doc.is_array()) {
    for (const auto& element : doc) {
      if (element.is_string()) out.emplace(incsum::render_path(segments), element.get<std::string>());
    }
  } else if (doc.is_object()) {
    for (const auto& [key, value] : doc.items()) {
      segments.push_back(key);
      collect_leaves(value, segments, out);
      segments.pop_back();
    }
  }
}

std::multiset<std::pair<std::string, std::string>> leaf_pairs(const Json& doc) {
  std::multiset<std::pair<std::string, std::string>> out;
  std::vector<std::string> segments;
  collect_leaves(doc, segments, out);
  return out;
}

}  // namespace

TEST_CASE("parse_path accepts the dotted-key subset") {
  CHECK(incsum::parse_path("$.attributes.Amenities").segments ==
        std::vector<std::string>{"attributes", "Amenities"});
  CHECK(incsum::parse_path("$.'attributes'.'Noise Level'").segments ==
        std::vector<std::string>{"attributes", "Noise Level"});
  CHECK(incsum::parse_path("$.'attributes'.'Food & Beverage'").segments ==
        std::vector<std::string>{"attributes", "Food & Beverage"});
  CHECK(incsum::parse_path("$.a_b.c&d").segments == std::vector<std::string>{"a_b", "c&d"});
  CHECK(incsum::parse_path("$.'a\\'b'").segments == std::vector<std::string>{"a'b"});
}

TEST_CASE("parse_path rejects bad input with positions") {
  auto pos_of = [](const std::string& text) -> std::size_t {
    try {
      incsum::parse_path(text);
    } catch (const incsum::PathParseError& err) {
      return err.position;
    }
    FAIL("expected parse error for: " << text);
    return SIZE_MAX;
  };
  CHECK(pos_of("attributes.Amenities") == 0);  // missing root
  CHECK(pos_of("") == 0);
  CHECK(pos_of("$.") == 2);                    // trailing dot
  CHECK(pos_of("$.a.") == 4);
  CHECK(pos_of("$.'abc") == 6);                // unterminated quote
  CHECK_THROWS_AS(incsum::parse_path("$..a"), incsum::PathParseError);
  CHECK_THROWS_AS(incsum::parse_path("$.a[0]"), incsum::PathParseError);
  CHECK_THROWS_AS(incsum::parse_path("$.*"), incsum::PathParseError);
  CHECK_THROWS_AS(incsum::parse_path("$.a b"), incsum::PathParseError);
  CHECK_THROWS_AS(incsum::parse_path("$"), incsum::PathParseError);
}

TEST_CASE("render_path emits the canonical quoted form") {
  CHECK(incsum::render_path(JsonPath{{"attributes", "Amenities"}}) ==
        "$.'attributes'.'Amenities'");
  CHECK(incsum::render_path(JsonPath{{"attributes", "Noise Level"}}) ==
        "$.'attributes'.'Noise Level'");
  CHECK(incsum::render_path(JsonPath{{"a'b"}}) == "$.'a\\'b'");
}

TEST_CASE("property: parse/render round trip") {
  std::mt19937 rng(42);
  for (int i = 0; i < 600; ++i) {
    JsonPath path;
    std::size_t n = 1 + rng() % 4;
    for (std::size_t s = 0; s < n; ++s) path.segments.push_back(random_key(rng));
    CHECK(incsum::parse_path(incsum::render_path(path)) == path);
  }
  // And for accepted raw spellings: re-render re-parses to the same segments.
  for (const char* raw : {"$.attributes.Amenities", "$.'a'.'b b'.c", "$.'x\\\\y'"}) {
    JsonPath parsed = incsum::parse_path(raw);
    CHECK(incsum::parse_path(incsum::render_path(parsed)) == parsed);
  }
}

TEST_CASE("resolve walks without mutating") {
  Json doc = Json::parse(R"({"attributes":{"Amenities":["two pools"]}})");
  const Json snapshot = doc;

  auto* amenities = incsum::resolve(doc, incsum::parse_path("$.attributes.Amenities"));
  REQUIRE(amenities != nullptr);
  CHECK(*amenities == Json::parse(R"(["two pools"])"));

  CHECK(incsum::resolve(doc, incsum::parse_path("$.attributes.'Noise Level'")) == nullptr);

  auto* attrs = incsum::resolve(doc, incsum::parse_path("$.attributes"));
  REQUIRE(attrs != nullptr);
  CHECK(*attrs == doc["attributes"]);
  CHECK(doc == snapshot);
}

TEST_CASE("property: resolve matches the naive oracle") {
  std::mt19937 rng(20240818);
  for (int i = 0; i < 600; ++i) {
    Json doc = random_doc(rng, 4);
    JsonPath path;
    std::size_t n = 1 + rng() % 4;
    for (std::size_t s = 0; s < n; ++s) path.segments.push_back(random_key(rng));
    const Json* expected = naive_lookup(doc, path.segments);
    const Json* actual = incsum::resolve(doc, path);
    if (expected == nullptr) {
      CHECK(actual == nullptr);
    } else {
      REQUIRE(actual != nullptr);
      CHECK(*actual == *expected);
    }
  }
}

TEST_CASE("apply_update unions list values in order") {
  auto schema = incsum::entity_schema();
  Json doc = Json::parse(R"({"attributes":{"Amenities":["two pools"]}})");
  JsonPath path = incsum::parse_path("$.'attributes'.'Amenities'");

  Json updated = incsum::apply_update(doc, path, Json::parse(R"(["pub opens till midnight"])"), schema);
  CHECK(updated["attributes"]["Amenities"] ==
        Json::parse(R"(["two pools","pub opens till midnight"])"));

  SECTION("verbatim duplicates are dropped") {
    Json same = incsum::apply_update(doc, path, Json::parse(R"(["two pools"])"), schema);
    CHECK(same == doc);
  }

  SECTION("missing target is path-not-found") {
    try {
      incsum::apply_update(doc, incsum::parse_path("$.'attributes'.'Pool'"),
                           Json::parse(R"(["x"])"), schema);
      FAIL("expected PatchError");
    } catch (const incsum::PatchError& err) {
      CHECK(err.reason == SkipReason::PathNotFound);
    }
  }

  SECTION("wrong value type is type-mismatch") {
    try {
      incsum::apply_update(doc, path, Json("not a list"), schema);
      FAIL("expected PatchError");
    } catch (const incsum::PatchError& err) {
      CHECK(err.reason == SkipReason::TypeMismatch);
    }
  }
}

TEST_CASE("apply_add inserts a fresh key at the parent") {
  auto schema = incsum::entity_schema();
  Json doc = Json::parse(
      R"({"attributes":{"Amenities":["two pools"],"Food & Beverage":["limited breakfast options"]}})");

  Json added = incsum::apply_add(doc, incsum::parse_path("$.'attributes'.'Noise Level'"),
                                 Json::parse(R"(["Notable street noise at night"])"), schema);
  CHECK(added["attributes"]["Noise Level"] ==
        Json::parse(R"(["Notable street noise at night"])"));
  CHECK(added["attributes"]["Amenities"] == doc["attributes"]["Amenities"]);

  SECTION("existing key is an error") {
    try {
      incsum::apply_add(doc, incsum::parse_path("$.'attributes'.'Amenities'"),
                        Json::parse(R"(["x"])"), schema);
      FAIL("expected PatchError");
    } catch (const incsum::PatchError& err) {
      CHECK(err.reason == SkipReason::KeyAlreadyExistsConvertedToUpdate);
    }
  }

  SECTION("illegal path under schema is schema-violation") {
    try {
      incsum::apply_add(doc, incsum::parse_path("$.'ratings'.'x'"), Json::parse(R"(["x"])"),
                        schema);
      FAIL("expected PatchError");
    } catch (const incsum::PatchError& err) {
      CHECK(err.reason == SkipReason::SchemaViolation);
    }
  }

  SECTION("missing parent is parent-not-found") {
    Json empty = Json::parse(R"({})");
    try {
      incsum::apply_add(empty, incsum::parse_path("$.'attributes'.'X'"),
                        Json::parse(R"(["x"])"), schema);
      FAIL("expected PatchError");
    } catch (const incsum::PatchError& err) {
      CHECK(err.reason == SkipReason::PathNotFound);
    }
  }
}

TEST_CASE("apply_patch_set composes the worked example") {
  auto schema = incsum::entity_schema();
  Json doc = Json::parse(
      R"({"attributes":{"Amenities":["two pools"],"Food & Beverage":["limited breakfast options"]}})");
  PatchSet patch;
  patch.propose(PatchKind::Update, "$.'attributes'.'Amenities'",
                Json::parse(R"(["pub opens till midnight"])"));
  patch.propose(PatchKind::Add, "$.'attributes'.'Noise Level'",
                Json::parse(R"(["Notable street noise at night"])"));

  auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
  CHECK(result == Json::parse(R"({"attributes":{
      "Amenities":["two pools","pub opens till midnight"],
      "Food & Beverage":["limited breakfast options"],
      "Noise Level":["Notable street noise at night"]}})"));
  CHECK(outcome.applied.size() == 2);
  CHECK(outcome.skipped.empty());
  CHECK(outcome.result_valid);
}

TEST_CASE("apply_patch_set robustness contracts") {
  auto schema = incsum::entity_schema();
  Json doc = Json::parse(R"({"attributes":{"A":["x"]}})");

  SECTION("empty patch set is identity") {
    auto [result, outcome] = incsum::apply_patch_set(doc, PatchSet{}, schema);
    CHECK(result == doc);
    CHECK(outcome.applied.empty());
    CHECK(outcome.skipped.empty());
  }

  SECTION("unparseable path is skipped, not thrown") {
    PatchSet patch;
    patch.propose(PatchKind::Update, "foo", Json::parse(R"(["y"])"));
    auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
    CHECK(result == doc);
    REQUIRE(outcome.skipped.size() == 1);
    CHECK(outcome.skipped[0].reason == SkipReason::UnparseablePath);
  }

  SECTION("add on existing key downgrades to update and is audited") {
    PatchSet patch;
    patch.propose(PatchKind::Add, "$.'attributes'.'A'", Json::parse(R"(["y"])"));
    auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
    CHECK(result["attributes"]["A"] == Json::parse(R"(["x","y"])"));
    REQUIRE(outcome.skipped.size() == 1);
    CHECK(outcome.skipped[0].reason == SkipReason::KeyAlreadyExistsConvertedToUpdate);
  }

  SECTION("update at nonexistent path leaves the doc alone") {
    PatchSet patch;
    patch.propose(PatchKind::Update, "$.'attributes'.'B'", Json::parse(R"(["y"])"));
    auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
    CHECK(result == doc);
    REQUIRE(outcome.skipped.size() == 1);
    CHECK(outcome.skipped[0].reason == SkipReason::PathNotFound);
  }

  SECTION("every entry lands in applied or skipped exactly once") {
    PatchSet patch;
    patch.propose(PatchKind::Update, "$.'attributes'.'A'", Json::parse(R"(["y"])"));
    patch.propose(PatchKind::Update, "$.'attributes'.'Missing'", Json::parse(R"(["z"])"));
    patch.propose(PatchKind::Add, "$.'attributes'.'B'", Json::parse(R"(["w"])"));
    patch.propose(PatchKind::Add, "bad path", Json::parse(R"(["q"])"));
    auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
    CHECK(outcome.applied.size() + outcome.skipped.size() == 4);
  }
}

TEST_CASE("property: patch application never loses information") {
  auto schema = incsum::entity_schema();
  std::mt19937 rng(1234);
  for (int i = 0; i < 300; ++i) {
    // Random valid entity doc.
    Json doc = Json{{"attributes", Json::object()}};
    std::size_t keys = rng() % 5;
    for (std::size_t k = 0; k < keys; ++k) {
      Json list = Json::array();
      for (std::size_t v = 0, n = rng() % 3; v < n; ++v) list.push_back("v" + std::to_string(rng() % 20));
      doc["attributes"][random_key(rng)] = list;
    }

    PatchSet patch;
    std::size_t ops = rng() % 5;
    for (std::size_t o = 0; o < ops; ++o) {
      Json value = Json::array();
      for (std::size_t v = 0, n = rng() % 3; v < n; ++v) value.push_back("p" + std::to_string(rng() % 20));
      std::string path = "$.'attributes'.'" + random_key(rng) + "'";
      if (rng() % 5 == 0) path = "garbage";  // some unparseable entries
      patch.propose(rng() % 2 == 0 ? PatchKind::Update : PatchKind::Add, path, value);
    }

    auto before = leaf_pairs(doc);
    auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
    auto after = leaf_pairs(result);
    for (const auto& pair : before) {
      INFO(pair.first << " = " << pair.second);
      CHECK(after.count(pair) >= 1);
    }
    CHECK(incsum::validate(schema, result).valid());
  }
}

TEST_CASE("property: keys not named by a patch keep their relative order") {
  auto schema = incsum::entity_schema();
  Json doc = Json::parse(R"({"attributes":{"C":["1"],"A":["2"],"B":["3"]}})");
  PatchSet patch;
  patch.propose(PatchKind::Update, "$.'attributes'.'A'", Json::parse(R"(["4"])"));
  patch.propose(PatchKind::Add, "$.'attributes'.'D'", Json::parse(R"(["5"])"));
  auto [result, outcome] = incsum::apply_patch_set(doc, patch, schema);
  std::vector<std::string> order;
  for (const auto& [key, _] : result["attributes"].items()) order.push_back(key);
  CHECK(order == std::vector<std::string>{"C", "A", "B", "D"});
}

TEST_CASE("patch set wire shape") {
  PatchSet patch;
  patch.propose(PatchKind::Update, "$.'attributes'.'Amenities'", Json::parse(R"(["x"])"));
  patch.propose(PatchKind::Add, "$.'attributes'.'New'", Json::parse(R"(["y"])"));
  CHECK(patch.to_json() == Json::parse(
      R"({"$.'attributes'.'Amenities'":{"update":["x"]},"$.'attributes'.'New'":{"add":["y"]}})"));
}
