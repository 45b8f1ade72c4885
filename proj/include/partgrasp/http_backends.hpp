// HTTP transports for the language/vision backends and the fixture-backed
// mock server speaking the same wire contract.
//
// LLM wire contract: POST <endpoint>/v1/chat/completions with a JSON body
// {"model", "messages": [{"role","content"}...], "temperature": 0}; the first
// choice's message content is the answer. VLM wire contract: POST
// <endpoint>/detect with {"image": <base64>, "image_id", "queries": [text]};
// the response carries {"detections": [{"box": [x0,y0,x1,y1], "score",
// "label"}]}. Auth tokens come from the environment variable named in the
// backend config and are never written to disk.
#pragma once

#include <httplib.h>

#include <cstdlib>

#include "partgrasp/backends.hpp"

namespace partgrasp {

namespace detail {

inline std::string base64_encode(const std::string& data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t chunk = static_cast<unsigned char>(data[i]) << 16;
    if (i + 1 < data.size()) chunk |= static_cast<unsigned char>(data[i + 1]) << 8;
    if (i + 2 < data.size()) chunk |= static_cast<unsigned char>(data[i + 2]);
    out += alphabet[(chunk >> 18) & 63];
    out += alphabet[(chunk >> 12) & 63];
    out += i + 1 < data.size() ? alphabet[(chunk >> 6) & 63] : '=';
    out += i + 2 < data.size() ? alphabet[chunk & 63] : '=';
  }
  return out;
}

inline std::string auth_header_value(const std::string& env_name) {
  if (env_name.empty()) return "";
  const char* token = std::getenv(env_name.c_str());
  return token ? std::string("Bearer ") + token : "";
}

}  // namespace detail

class HttpLlm : public LlmClient {
 public:
  HttpLlm(BackendEndpoint endpoint, double timeout_s, int retries)
      : endpoint_(std::move(endpoint)), timeout_s_(timeout_s), retries_(retries) {}

  std::string complete(const ChatPrompt& prompt) override {
    nlohmann::json body;
    body["model"] = endpoint_.model.empty() ? "gpt-4" : endpoint_.model;
    body["temperature"] = 0;  // deterministic part choice
    body["messages"] = nlohmann::json::array();
    for (const auto& m : prompt.messages)
      body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    const auto response = post_json("/v1/chat/completions", body);
    try {
      return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("llm response: ") + e.what());
    }
  }

 private:
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body);

  BackendEndpoint endpoint_;
  double timeout_s_;
  int retries_;
};

class HttpVlm : public VlmClient {
 public:
  HttpVlm(BackendEndpoint endpoint, double timeout_s, int retries)
      : endpoint_(std::move(endpoint)), timeout_s_(timeout_s), retries_(retries) {}

  std::vector<BoundingBox2D> detect(const VlmImage& image,
                                    const std::string& query) override {
    nlohmann::json body;
    body["image"] = detail::base64_encode(encode_ppm(*image.pixels));
    body["image_id"] = image.id;
    body["queries"] = nlohmann::json::array({query});

    const auto response = post_json("/detect", body);
    std::vector<BoundingBox2D> out;
    try {
      for (const auto& det : response.at("detections")) {
        BoundingBox2D box;
        box.x_min = det.at("box").at(0).get<double>();
        box.y_min = det.at("box").at(1).get<double>();
        box.x_max = det.at("box").at(2).get<double>();
        box.y_max = det.at("box").at(3).get<double>();
        box.confidence = det.at("score").get<double>();
        box.label = det.value("label", query);
        out.push_back(std::move(box));
      }
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("vlm response: ") + e.what());
    }
    return out;
  }

 private:
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body);

  BackendEndpoint endpoint_;
  double timeout_s_;
  int retries_;
};

namespace detail {

inline nlohmann::json post_with_retries(const BackendEndpoint& endpoint,
                                        double timeout_s, int retries,
                                        const std::string& path,
                                        const nlohmann::json& body) {
  httplib::Client client(endpoint.endpoint);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<long>(timeout_s * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(static_cast<long>(timeout_s * 1000)));
  httplib::Headers headers;
  const std::string auth = auth_header_value(endpoint.auth_env);
  if (!auth.empty()) headers.emplace("Authorization", auth);

  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("backend body: ") + e.what());
    }
  }
  throw BackendUnavailable(endpoint.endpoint + path + ": " + last_error + " after " +
                           std::to_string(retries + 1) + " attempt(s)");
}

}  // namespace detail

inline nlohmann::json HttpLlm::post_json(const std::string& path,
                                         const nlohmann::json& body) {
  return detail::post_with_retries(endpoint_, timeout_s_, retries_, path, body);
}

inline nlohmann::json HttpVlm::post_json(const std::string& path,
                                         const nlohmann::json& body) {
  return detail::post_with_retries(endpoint_, timeout_s_, retries_, path, body);
}

inline std::unique_ptr<LlmClient> make_llm_client(const BackendConfig& config) {
  if (config.llm.kind == "mock") return std::make_unique<MockLlm>(config.llm.fixture);
  return std::make_unique<HttpLlm>(config.llm, config.timeout_s, config.retries);
}

inline std::unique_ptr<VlmClient> make_vlm_client(const BackendConfig& config) {
  if (config.vlm.kind == "mock") return std::make_unique<MockVlm>(config.vlm.fixture);
  return std::make_unique<HttpVlm>(config.vlm, config.timeout_s, config.retries);
}

// Serves the two fixture tables over the wire contract; used by the
// `mock-serve` subcommand and by the HTTP client integration tests.
class MockServer {
 public:
  MockServer(const std::filesystem::path& llm_fixture,
             const std::filesystem::path& vlm_fixture)
      : llm_(llm_fixture), vlm_(vlm_fixture) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   handle_llm(req, res);
                 });
    server_.Post("/detect", [this](const httplib::Request& req, httplib::Response& res) {
      handle_vlm(req, res);
    });
  }

  httplib::Server& server() { return server_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

 private:
  void handle_llm(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
      ChatPrompt prompt;
      for (const auto& m : body.at("messages"))
        prompt.messages.push_back(
            {m.at("role").get<std::string>(), m.at("content").get<std::string>()});
      prompt.validate();
      const std::string answer = llm_.complete(prompt);
      nlohmann::json out;
      out["choices"] = nlohmann::json::array(
          {{{"message", {{"role", "assistant"}, {"content", answer}}}}});
      res.set_content(out.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(std::string("{\"error\":\"") + e.what() + "\"}",
                      "application/json");
    }
  }

  void handle_vlm(const httplib::Request& req, httplib::Response& res) {
    try {
      const auto body = nlohmann::json::parse(req.body);
      const std::string image_id = body.value("image_id", "");
      nlohmann::json detections = nlohmann::json::array();
      ImageRGB dummy;  // the fixture keys on image_id, not pixels
      dummy.width = dummy.height = 1;
      dummy.pixels.resize(3);
      for (const auto& query : body.at("queries")) {
        for (const auto& box :
             vlm_.detect({image_id, &dummy}, query.get<std::string>())) {
          detections.push_back({{"box", {box.x_min, box.y_min, box.x_max, box.y_max}},
                                {"score", box.confidence},
                                {"label", box.label}});
        }
      }
      nlohmann::json out;
      out["detections"] = detections;
      res.set_content(out.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(std::string("{\"error\":\"") + e.what() + "\"}",
                      "application/json");
    }
  }

  MockLlm llm_;
  MockVlm vlm_;
  httplib::Server server_;
};

}  // namespace partgrasp
