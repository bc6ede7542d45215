#include "nutrunner/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nutrunner {

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, const std::string& key, const std::string& origin) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError(origin + ": key '" + key + "': expected a number, got '" + tok + "'");
  }
  return v;
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KeyValueFile KeyValueFile::parse_string(const std::string& text, const std::string& origin) {
  KeyValueFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string val = strip(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[key] = split_tokens(val);
  }
  return cfg;
}

double KeyValueFile::get_scalar(const std::string& key) const {
  const auto nums = get_numbers(key, 1);
  return nums[0];
}

double KeyValueFile::get_scalar_or(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return get_scalar(key);
}

std::vector<double> KeyValueFile::get_numbers(const std::string& key, size_t expected_count) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  if (it->second.size() != expected_count) {
    throw ConfigError(origin_ + ": key '" + key + "': expected " + std::to_string(expected_count) +
                      " values, got " + std::to_string(it->second.size()));
  }
  std::vector<double> out;
  out.reserve(expected_count);
  for (const auto& tok : it->second) out.push_back(parse_number(tok, key, origin_));
  return out;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
  if (it->second.size() != 1) {
    throw ConfigError(origin_ + ": key '" + key + "': expected a single token");
  }
  return it->second[0];
}

std::string KeyValueFile::get_string_or(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  return get_string(key);
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  std::vector<std::string> toks;
  std::string t;
  while (is >> t) toks.push_back(t);
  values_[key] = toks;
}

}  // namespace nutrunner
