// Pluggable language/vision backends behind two tiny interfaces, plus the
// deterministic offline mocks driven by fixture tables. The mock LLM answers
// from an (object, mode) -> part table; the mock VLM from an
// (image id, part) -> box table.
#pragma once

#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "partgrasp/camera.hpp"
#include "partgrasp/image.hpp"
#include "partgrasp/prompts.hpp"

namespace partgrasp {

struct PartAnswer {
  std::string part_label;
  std::string raw_response;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Raw completion text for the prompt; empty string means no content.
  virtual std::string complete(const ChatPrompt& prompt) = 0;
};

struct VlmImage {
  std::string id;          // stable key, typically the image filename stem
  const ImageRGB* pixels;  // non-owning
};

class VlmClient {
 public:
  virtual ~VlmClient() = default;
  virtual std::vector<BoundingBox2D> detect(const VlmImage& image,
                                            const std::string& query) = 0;
};

inline PartAnswer query_part(LlmClient& backend, const ChatPrompt& prompt) {
  prompt.validate();
  const std::string raw = backend.complete(prompt);
  if (trim(raw).empty()) throw MalformedResponse("backend returned empty content");
  PartAnswer answer;
  answer.raw_response = raw;
  answer.part_label = normalize_part_label(raw);
  if (answer.part_label.empty())
    throw MalformedResponse("response normalized to an empty part label");
  return answer;
}

inline BoundingBox2D ground_part(VlmClient& backend, const VlmImage& image,
                                 const std::string& part_label,
                                 double confidence_threshold = 0.1) {
  if (part_label.empty()) throw InvalidLabel("part label is empty");
  if (image.pixels == nullptr || image.pixels->width <= 0)
    throw ConfigError("grounding requires a loaded image");
  auto detections = backend.detect(image, part_label);
  std::optional<BoundingBox2D> best;
  int above = 0;
  for (const auto& det : detections) {
    if (det.confidence < confidence_threshold) continue;
    ++above;
    if (!best || det.confidence > best->confidence) best = det;
  }
  if (!best)
    throw NoDetection("no box above confidence " + format_g9(confidence_threshold) +
                      " for part '" + part_label + "' in image '" + image.id + "'");
  if (above > 1)
    std::cerr << "[vlm] " << above << " detections above threshold for '"
              << part_label << "'; keeping the most confident\n";
  auto clamped = best->clamped(image.pixels->width, image.pixels->height);
  if (!clamped) throw NoDetection("best box lies outside the image");
  return *clamped;
}

// ---------------------------------------------------------------------------
// fixture parsing (simple CSV with optional double quotes)

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable load_csv(const std::filesystem::path& path) {
  CsvTable table;
  std::istringstream in(read_text_file(path));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      table.header = fields;
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw FixtureParseError(path.string() + ": row width mismatch: " + line);
      table.rows.push_back(fields);
    }
  }
  if (first) throw FixtureParseError(path.string() + ": empty fixture");
  return table;
}

inline int csv_column(const CsvTable& table, const std::string& name,
                      const std::filesystem::path& path) {
  for (size_t i = 0; i < table.header.size(); ++i)
    if (trim(table.header[i]) == name) return static_cast<int>(i);
  throw FixtureParseError(path.string() + ": missing column '" + name + "'");
}

// Recovers (object label, mode) from a prompt built by build_prompt; the
// fixture table is keyed on them.
inline std::pair<std::string, TaskMode> parse_prompt_subject(const ChatPrompt& prompt) {
  const std::string& user = prompt.user();
  const TaskMode mode = user.find("avoid touching") != std::string::npos
                            ? TaskMode::Avoid
                            : TaskMode::Grasp;
  const std::string anchor = "pick up ";
  const size_t start = user.find(anchor);
  const size_t end = user.find(", which part");
  if (start == std::string::npos || end == std::string::npos || end <= start)
    return {"", mode};
  std::string label = user.substr(start + anchor.size(), end - start - anchor.size());
  if (label.rfind("an ", 0) == 0)
    label = label.substr(3);
  else if (label.rfind("a ", 0) == 0)
    label = label.substr(2);
  return {to_lower(trim(label)), mode};
}

}  // namespace detail

class MockLlm : public LlmClient {
 public:
  explicit MockLlm(const std::filesystem::path& fixture_path) {
    auto table = detail::load_csv(fixture_path);
    const int c_obj = detail::csv_column(table, "object", fixture_path);
    const int c_mode = detail::csv_column(table, "mode", fixture_path);
    const int c_part = detail::csv_column(table, "part", fixture_path);
    for (const auto& row : table.rows) {
      TaskMode mode;
      try {
        mode = task_mode_from_string(to_lower(trim(row[c_mode])));
      } catch (const std::invalid_argument& e) {
        throw FixtureParseError(fixture_path.string() + ": " + e.what());
      }
      const std::string part = trim(row[c_part]);
      if (part.empty())
        throw FixtureParseError(fixture_path.string() + ": empty part for object '" +
                                row[c_obj] + "'");
      parts_[{to_lower(trim(row[c_obj])), mode}] = part;
    }
  }

  std::string complete(const ChatPrompt& prompt) override {
    auto [label, mode] = detail::parse_prompt_subject(prompt);
    auto it = parts_.find({label, mode});
    if (it == parts_.end()) return "";  // surfaces as MalformedResponse
    return it->second;
  }

  std::optional<std::string> lookup(const std::string& object_label, TaskMode mode) const {
    auto it = parts_.find({to_lower(trim(object_label)), mode});
    if (it == parts_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::pair<std::string, TaskMode>, std::string> parts_;
};

class MockVlm : public VlmClient {
 public:
  explicit MockVlm(const std::filesystem::path& fixture_path) {
    auto table = detail::load_csv(fixture_path);
    const int c_img = detail::csv_column(table, "image", fixture_path);
    const int c_part = detail::csv_column(table, "part", fixture_path);
    const int cs[4] = {detail::csv_column(table, "x_min", fixture_path),
                       detail::csv_column(table, "y_min", fixture_path),
                       detail::csv_column(table, "x_max", fixture_path),
                       detail::csv_column(table, "y_max", fixture_path)};
    const int c_conf = detail::csv_column(table, "confidence", fixture_path);
    for (const auto& row : table.rows) {
      BoundingBox2D box;
      try {
        box.x_min = std::stod(row[cs[0]]);
        box.y_min = std::stod(row[cs[1]]);
        box.x_max = std::stod(row[cs[2]]);
        box.y_max = std::stod(row[cs[3]]);
        box.confidence = std::stod(row[c_conf]);
      } catch (const std::exception&) {
        throw FixtureParseError(fixture_path.string() + ": bad numeric field");
      }
      box.label = to_lower(trim(row[c_part]));
      if (!box.valid())
        throw FixtureParseError(fixture_path.string() + ": degenerate box for '" +
                                box.label + "'");
      boxes_[{to_lower(trim(row[c_img])), box.label}].push_back(box);
    }
  }

  std::vector<BoundingBox2D> detect(const VlmImage& image,
                                    const std::string& query) override {
    auto it = boxes_.find({to_lower(image.id), to_lower(trim(query))});
    if (it == boxes_.end()) return {};
    return it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<BoundingBox2D>> boxes_;
};

// ---------------------------------------------------------------------------
// backend configuration

struct BackendEndpoint {
  std::string kind = "mock";  // "mock" | "http"
  std::filesystem::path fixture;
  std::string endpoint;
  std::string model;
  std::string auth_env;
};

struct BackendConfig {
  BackendEndpoint llm;
  BackendEndpoint vlm;
  double timeout_s = 30.0;
  int retries = 2;

  void validate() const {
    if (!(timeout_s > 0.0)) throw ConfigError("backend timeout must be > 0");
    if (retries < 0) throw ConfigError("backend retries must be >= 0");
    for (const auto* ep : {&llm, &vlm}) {
      if (ep->kind != "mock" && ep->kind != "http")
        throw ConfigError("backend kind must be 'mock' or 'http', got '" + ep->kind + "'");
      if (ep->kind == "mock" && ep->fixture.empty())
        throw ConfigError("mock backend requires a fixture path");
      if (ep->kind == "http" && ep->endpoint.empty())
        throw ConfigError("http backend requires an endpoint URL");
    }
  }
};

inline BackendEndpoint backend_endpoint_from_json(const nlohmann::json& doc,
                                                  const std::filesystem::path& base_dir) {
  BackendEndpoint ep;
  ep.kind = doc.value("kind", "mock");
  if (doc.contains("fixture")) {
    ep.fixture = doc.at("fixture").get<std::string>();
    if (ep.fixture.is_relative()) ep.fixture = base_dir / ep.fixture;
  }
  ep.endpoint = doc.value("endpoint", "");
  ep.model = doc.value("model", "");
  ep.auth_env = doc.value("auth_env", "");
  return ep;
}

inline BackendConfig backend_config_from_json(const nlohmann::json& doc,
                                              const std::filesystem::path& base_dir) {
  BackendConfig cfg;
  if (doc.contains("llm")) cfg.llm = backend_endpoint_from_json(doc.at("llm"), base_dir);
  if (doc.contains("vlm")) cfg.vlm = backend_endpoint_from_json(doc.at("vlm"), base_dir);
  cfg.timeout_s = doc.value("timeout_s", 30.0);
  cfg.retries = doc.value("retries", 2);
  cfg.validate();
  return cfg;
}

}  // namespace partgrasp
