#ifndef JPSA_CONFIG_HPP
#define JPSA_CONFIG_HPP

#include "jpsa/data_model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jpsa {

/// Flat key=value settings with dotted namespaces (jpsa.alpha=1.0).
/// Blank lines and lines starting with '#' are ignored; later keys win.
class ConfigMap {
 public:
  static ConfigMap parse(std::string_view text);
  static ConfigMap load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void erase(const std::string& key) { entries_.erase(key); }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  // Keys under "prefix." with the prefix stripped.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Sorted key=value lines; parse(to_text()) reproduces the map.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> entries_;
};

std::vector<std::string> split_list(std::string_view text);

}  // namespace jpsa

#endif  // JPSA_CONFIG_HPP
