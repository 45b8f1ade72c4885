// Chat prompt construction for the part-selection queries, plus the
// normalization applied to backend answers. Templates are golden-tested
// byte-for-byte; do not reword them.
#pragma once

#include <string>
#include <vector>

#include "partgrasp/common.hpp"
#include "partgrasp/errors.hpp"

namespace partgrasp {

struct PartQuery {
  std::string object_label;
  TaskMode mode = TaskMode::Grasp;
};

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

struct ChatPrompt {
  std::vector<ChatMessage> messages;

  const std::string& system() const { return messages.at(0).content; }
  const std::string& user() const { return messages.at(1).content; }

  void validate() const {
    if (messages.size() != 2 || messages[0].role != "system" || messages[1].role != "user")
      throw InvalidLabel("prompt must be one system message followed by one user message");
  }
};

inline const char* kSystemPrompt = "You are an intelligent robotic arm.";

namespace detail {

inline std::string checked_label(const PartQuery& query) {
  std::string label = trim(query.object_label);
  if (label.empty()) throw InvalidLabel("object label is empty");
  if (label.size() > 128) throw InvalidLabel("object label exceeds 128 characters");
  return label;
}

}  // namespace detail

// "a"/"an" by leading sound approximated by the first letter; the template's
// literal form always uses "an".
inline std::string article_for(const std::string& label) {
  if (label.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(label[0])));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

inline ChatPrompt build_grasp_prompt(const PartQuery& query, bool literal_template = false) {
  const std::string label = detail::checked_label(query);
  const std::string article = literal_template ? "an" : article_for(label);
  ChatPrompt prompt;
  prompt.messages.push_back({"system", kSystemPrompt});
  prompt.messages.push_back(
      {"user", "If you want to pick up " + article + " " + label +
                   ", which part makes the most sense to grasp? Name one part."});
  return prompt;
}

inline ChatPrompt build_avoid_prompt(const PartQuery& query, bool literal_template = false) {
  const std::string label = detail::checked_label(query);
  const std::string subject =
      literal_template ? "an " + label : article_for(label) + " " + label;
  ChatPrompt prompt;
  prompt.messages.push_back({"system", kSystemPrompt});
  prompt.messages.push_back(
      {"user", "Consider you are an intelligent robotic arm. If you want to pick up " +
                   subject + ", which part you should avoid touching? Answer in one word."});
  return prompt;
}

inline ChatPrompt build_prompt(const PartQuery& query, bool literal_template = false) {
  return query.mode == TaskMode::Grasp ? build_grasp_prompt(query, literal_template)
                                       : build_avoid_prompt(query, literal_template);
}

// First line of the response, lowercased, leading article and trailing
// punctuation stripped, capped at 5 words. Idempotent.
inline std::string normalize_part_label(const std::string& raw) {
  std::string line;
  for (char c : raw) {
    if (c == '\n' || c == '\r') {
      if (!trim(line).empty()) break;
      line.clear();
      continue;
    }
    line += c;
  }
  line = to_lower(trim(line));
  while (!line.empty()) {
    const char c = line.back();
    if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' ||
        c == '"' || c == '\'')
      line.pop_back();
    else
      break;
  }
  while (!line.empty()) {
    const char c = line.front();
    if (c == '"' || c == '\'')
      line.erase(line.begin());
    else
      break;
  }
  std::istringstream ss(line);
  std::vector<std::string> words;
  std::string w;
  while (ss >> w && words.size() < 5) words.push_back(w);
  if (!words.empty() && (words[0] == "a" || words[0] == "an" || words[0] == "the"))
    words.erase(words.begin());
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace partgrasp
