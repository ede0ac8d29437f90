#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qpercept/errors.hpp"

namespace qpercept {

/// One `[section]` of a key = value config file. Typed getters validate and
/// remember which keys were read so leftovers can be rejected as typos.
class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(std::string name, std::map<std::string, std::string> entries);

  const std::string& name() const { return name_; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double number(const std::string& key, double fallback) const;
  std::uint64_t count(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  /// Comma-separated reals; "start:step:stop" expands to an inclusive grid.
  std::vector<double> numbers(const std::string& key,
                              const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Throws InvalidConfig naming every key no getter asked for.
  void reject_unread() const;

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
  const std::string* lookup(const std::string& key) const;

  std::string name_;
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> read_;
};

/// Reads section `section` of an INI-style file. A missing section yields an
/// empty one; syntax errors throw InvalidConfig with the line number.
ConfigSection load_config(const std::filesystem::path& path,
                          const std::string& section);

}  // namespace qpercept
