#include "ghs/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ghs/error.hpp"

namespace ghs {

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("config", path.string() + " is not a JSON object");
  }
  const auto dir = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp{p};
    return fp.is_absolute() ? fp : dir / fp;
  };
  AppConfig c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "languages") {
      if (!value.is_array()) throw ValidationError("languages", "expected a list");
      for (const auto& l : value) {
        if (!l.is_string()) throw ValidationError("languages", "expected strings");
        c.languages.push_back(l.get<std::string>());
      }
    } else if (key == "selectors") {
      if (!value.is_string()) throw ValidationError("selectors", "expected a path");
      c.selectors = resolve(value.get<std::string>());
    } else if (key == "store") {
      if (!value.is_string()) throw ValidationError("store", "expected a string");
      std::string s = value.get<std::string>();
      bool plain_path = s != ":memory:" && s.find("://") == std::string::npos &&
                        s.rfind("sqlite:", 0) != 0;
      c.store = plain_path ? resolve(s).string() : s;
    } else if (key == "forge_url" || key == "web_url") {
      if (!value.is_string() || value.get<std::string>().empty()) {
        throw ValidationError(key, "expected a URL");
      }
      (key == "forge_url" ? c.forge_url : c.web_url) = value.get<std::string>();
    } else {
      throw ValidationError(key, "unknown config key");
    }
  }
  return c;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace ghs
