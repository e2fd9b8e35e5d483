#pragma once

#include <string>

#include <json.hpp>

namespace incsum {

// Summary documents are JSON value trees. Insertion order of object keys is
// significant (merge and patch operations must preserve it), so the ordered
// variant is used throughout.
using Json = nlohmann::ordered_json;

// Compact serialization: the form embedded in prompts and counted against
// token budgets.
inline std::string compact(const Json& doc) { return doc.dump(); }

// Pretty form for prompt sections and report files.
inline std::string pretty(const Json& doc) { return doc.dump(2); }

}  // namespace incsum
