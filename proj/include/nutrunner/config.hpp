#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nutrunner {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plain-text "key = value..." store. One assignment per line, '#' starts a
// comment, values are whitespace-separated tokens. Used both for robot model
// files and experiment configuration.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  // Typed accessors; throw ConfigError on missing key or malformed value.
  double get_scalar(const std::string& key) const;
  double get_scalar_or(const std::string& key, double fallback) const;
  std::vector<double> get_numbers(const std::string& key, size_t expected_count) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::vector<std::string>>& entries() const { return values_; }
  const std::string& origin() const { return origin_; }

  // Overrides an entry (used by the CLI to apply flag values on top of a file).
  void set(const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::vector<std::string>> values_;
  std::string origin_;
};

}  // namespace nutrunner
