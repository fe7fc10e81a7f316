#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace insole {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

} // namespace

Config Config::from_file(const std::string &path) {
  Config cfg;
  cfg.load_file(path);
  return cfg;
}

void Config::load_file(const std::string &path) {
  std::ifstream in(path);
  require(in.good(), Fault::IoError, "cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, Fault::SchemaError,
            path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), Fault::SchemaError,
            path + ":" + std::to_string(lineno) + ": empty key");
    entries_[key] = value;
  }
}

void Config::merge(const Config &other) {
  for (const auto &[k, v] : other.entries_)
    entries_[k] = v;
}

void Config::set(const std::string &key, const std::string &value) {
  entries_[key] = value;
}

bool Config::has(const std::string &key) const { return entries_.count(key) > 0; }

std::optional<std::string> Config::get(const std::string &key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string &key, const std::string &dflt) const {
  auto v = get(key);
  return v ? *v : dflt;
}

double Config::get_double(const std::string &key, double dflt) const {
  auto v = get(key);
  if (!v)
    return dflt;
  char *end = nullptr;
  const double x = std::strtod(v->c_str(), &end);
  require(end && *end == '\0' && end != v->c_str(), Fault::SchemaError,
          "config key '" + key + "': not a number: " + *v);
  return x;
}

std::int64_t Config::get_int(const std::string &key, std::int64_t dflt) const {
  auto v = get(key);
  if (!v)
    return dflt;
  char *end = nullptr;
  const long long x = std::strtoll(v->c_str(), &end, 10);
  require(end && *end == '\0' && end != v->c_str(), Fault::SchemaError,
          "config key '" + key + "': not an integer: " + *v);
  return static_cast<std::int64_t>(x);
}

std::uint64_t Config::get_u64(const std::string &key, std::uint64_t dflt) const {
  auto v = get(key);
  if (!v)
    return dflt;
  char *end = nullptr;
  const unsigned long long x = std::strtoull(v->c_str(), &end, 10);
  require(end && *end == '\0' && end != v->c_str(), Fault::SchemaError,
          "config key '" + key + "': not an unsigned integer: " + *v);
  return static_cast<std::uint64_t>(x);
}

bool Config::get_bool(const std::string &key, bool dflt) const {
  auto v = get(key);
  if (!v)
    return dflt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on")
    return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off")
    return false;
  raise(Fault::SchemaError, "config key '" + key + "': not a boolean: " + *v);
}

std::string Config::snapshot() const {
  std::ostringstream out;
  for (const auto &[k, v] : entries_)
    out << k << " = " << v << "\n";
  return out.str();
}

} // namespace insole
