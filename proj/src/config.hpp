#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace insole {

// Key-value configuration: `key = value` lines, '#' comments, UTF-8.
// Keys are dotted lowercase (adc.v_in, sync.target_hz, ident.breakpoints).
class Config {
public:
  Config() = default;

  static Config from_file(const std::string &path);
  void load_file(const std::string &path);
  // Later entries win.
  void merge(const Config &other);

  void set(const std::string &key, const std::string &value);
  bool has(const std::string &key) const;
  std::optional<std::string> get(const std::string &key) const;

  std::string get_string(const std::string &key, const std::string &dflt) const;
  double get_double(const std::string &key, double dflt) const;
  std::int64_t get_int(const std::string &key, std::int64_t dflt) const;
  std::uint64_t get_u64(const std::string &key, std::uint64_t dflt) const;
  bool get_bool(const std::string &key, bool dflt) const;

  // Canonical text form (sorted keys) used for snapshots in manifests.
  std::string snapshot() const;

  const std::map<std::string, std::string> &entries() const { return entries_; }

private:
  std::map<std::string, std::string> entries_;
};

} // namespace insole
