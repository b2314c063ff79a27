#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace suger {

// Flat `key = value` text format used for configs and split metadata.
// Lines starting with '#' are comments. Keys are emitted sorted.
class KeyValues {
 public:
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  static KeyValues parse(std::string_view text);
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace suger
