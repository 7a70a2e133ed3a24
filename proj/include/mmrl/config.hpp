#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

namespace mmrl {

// Flat `key = value` settings. Lookups with a default record the value they
// resolved to, so resolved() lists every setting a run actually used.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::size_t get_size(const std::string& key, std::size_t fallback);
  bool get_bool(const std::string& key, bool fallback);

  // Sorted `key = value` lines.
  std::string resolved() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mmrl
