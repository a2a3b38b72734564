#pragma once

#include <istream>
#include <map>
#include <string>

namespace biclkt {

// Flat "key = value" file format shared by the run config and the input
// format spec. '#' starts a comment, blank lines are skipped, whitespace
// around key and value is trimmed. Later duplicates overwrite earlier ones.
inline std::string kv_trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::map<std::string, std::string> parse_kv(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = kv_trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv_trim(t.substr(0, eq));
    std::string val = kv_trim(t.substr(eq + 1));
    if (!key.empty()) out[key] = val;
  }
  return out;
}

}  // namespace biclkt
