#pragma once

#include <memory>
#include <string>

#include "httplib.h"

#include "incsum/json.hpp"
#include "incsum/llm.hpp"

namespace incsum {

// Minimal completion endpoint: POST {"prompt": ..., "temperature": ...},
// reply {"text": ...}. Auth token, when set, is sent as a Bearer header.
class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(std::string url, std::string auth_token = "")
      : auth_token_(std::move(auth_token)) {
    // Split "<scheme>://<host>[:port]</path>" into client base and path.
    auto scheme_end = url.find("://");
    std::size_t path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
      base_ = url;
      path_ = "/";
    } else {
      base_ = url.substr(0, path_start);
      path_ = url.substr(path_start);
    }
    client_ = std::make_unique<httplib::Client>(base_);
  }

  LlmResponse complete(const LlmRequest& request) override {
    Json body = Json::object();
    body["prompt"] = request.prompt;
    body["temperature"] = request.temperature;
    httplib::Headers headers;
    if (!auth_token_.empty()) {
      headers.emplace("Authorization", "Bearer " + auth_token_);
    }
    auto result = client_->Post(path_, headers, body.dump(), "application/json");
    if (!result) {
      throw LlmError("http transport error: " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
      throw LlmError("http status " + std::to_string(result->status) + " from " + base_);
    }
    Json reply = Json::parse(result->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
        !reply["text"].is_string()) {
      throw LlmError("http reply is not {\"text\": ...}");
    }
    LlmResponse response;
    response.text = reply["text"].get<std::string>();
    response.meta["backend"] = "http";
    response.meta["status"] = std::to_string(result->status);
    return response;
  }

 private:
  std::string base_;
  std::string path_;
  std::string auth_token_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace incsum
