// Shared small types and utilities used across the toolkit.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace partgrasp {

// Whether the language/partition stage targets a part to grasp or to avoid.
enum class TaskMode { Grasp, Avoid };

inline std::string to_string(TaskMode m) {
  return m == TaskMode::Grasp ? "grasp" : "avoid";
}

inline TaskMode task_mode_from_string(std::string_view s) {
  if (s == "grasp") return TaskMode::Grasp;
  if (s == "avoid") return TaskMode::Avoid;
  throw std::invalid_argument("unknown task mode: " + std::string(s));
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Fixed 9-significant-digit float formatting; the one true formatter for all
// golden/serialized numeric output so identical doubles give identical bytes.
// Negative zero is normalized: "-0" would not survive a JSON round trip.
inline std::string format_g9(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so a partially written file is never observed under the
// final name.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view data) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace partgrasp
