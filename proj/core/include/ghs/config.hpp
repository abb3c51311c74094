#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ghs {

/// Deployment settings read from a JSON file:
///
///   {"languages": ["Java", ...], "selectors": "selectors.json",
///    "store": "ghs.db", "forge_url": "https://api.github.com",
///    "web_url": "https://github.com"}
///
/// Relative paths resolve against the file's directory.
struct AppConfig {
  std::vector<std::string> languages;
  std::optional<std::filesystem::path> selectors;
  std::optional<std::string> store;
  std::string forge_url = "https://api.github.com";
  std::string web_url = "https://github.com";

  /// Throws ValidationError.
  static AppConfig load(const std::filesystem::path& path);
};

/// Splits a comma- or whitespace-separated token list (GHS_TOKENS).
std::vector<std::string> split_tokens(const std::string& text);

}  // namespace ghs
