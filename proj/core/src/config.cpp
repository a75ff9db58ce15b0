#include "jpsa/config.hpp"

#include "jpsa/io_formats.hpp"

#include <charconv>

namespace jpsa {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, std::string_view text) {
  double v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw InputError("config: '" + key + "' expects a number, got '" + std::string(text) + "'");
  }
  return v;
}

int to_int(const std::string& key, std::string_view text) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw InputError("config: '" + key + "' expects an integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

ConfigMap ConfigMap::parse(std::string_view text) {
  ConfigMap cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config: line " + std::to_string(line_no) + " has no '='");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError("config: empty key on line " + std::to_string(line_no));
    cfg.entries_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

std::optional<std::string> ConfigMap::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? to_double(key, *v) : fallback;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  auto v = get(key);
  return v ? to_int(key, *v) : fallback;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw InputError("config: '" + key + "' expects a boolean, got '" + *v + "'");
}

std::vector<double> ConfigMap::get_doubles(const std::string& key) const {
  std::vector<double> out;
  if (auto v = get(key)) {
    for (const auto& item : split_list(*v)) out.push_back(to_double(key, item));
  }
  return out;
}

std::vector<int> ConfigMap::get_ints(const std::string& key) const {
  std::vector<int> out;
  if (auto v = get(key)) {
    for (const auto& item : split_list(*v)) out.push_back(to_int(key, item));
  }
  return out;
}

std::map<std::string, std::string> ConfigMap::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : entries_) {
    if (k.compare(0, p.size(), p) == 0) out[k.substr(p.size())] = v;
  }
  return out;
}

std::string ConfigMap::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace jpsa
