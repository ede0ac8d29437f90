#include "qpercept/config.hpp"

#include <cmath>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace qpercept {

namespace {

double parse_real(const std::string& s, bool& ok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    ok = false;
    return 0.0;
  }
  ok = used == s.size() && std::isfinite(v);
  return v;
}

}  // namespace

ConfigSection::ConfigSection(std::string name,
                             std::map<std::string, std::string> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {}

void ConfigSection::fail(const std::string& key, const std::string& why) const {
  std::ostringstream msg;
  msg << "[" << name_ << "] " << key;
  if (const std::string* v = lookup(key)) msg << " = '" << *v << "'";
  msg << ": " << why;
  throw InvalidConfig(msg.str());
}

const std::string* ConfigSection::lookup(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

double ConfigSection::number(const std::string& key, double fallback) const {
  read_.insert(key);
  const std::string* v = lookup(key);
  if (!v) return fallback;
  bool ok = false;
  double x = parse_real(*v, ok);
  if (!ok) fail(key, "expected a finite real number");
  return x;
}

std::uint64_t ConfigSection::count(const std::string& key,
                                   std::uint64_t fallback) const {
  read_.insert(key);
  const std::string* v = lookup(key);
  if (!v) return fallback;
  if (v->empty() || v->find_first_not_of("0123456789") != std::string::npos) {
    fail(key, "expected a non-negative integer");
  }
  try {
    return std::stoull(*v);
  } catch (const std::exception&) {
    fail(key, "integer out of range");
  }
}

bool ConfigSection::flag(const std::string& key, bool fallback) const {
  read_.insert(key);
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::string s = boost::algorithm::to_lower_copy(*v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  fail(key, "expected true or false");
}

std::string ConfigSection::text(const std::string& key,
                                const std::string& fallback) const {
  read_.insert(key);
  const std::string* v = lookup(key);
  return v ? *v : fallback;
}

std::vector<double> ConfigSection::numbers(
    const std::string& key, const std::vector<double>& fallback) const {
  read_.insert(key);
  const std::string* v = lookup(key);
  if (!v) return fallback;
  std::vector<std::string> parts;
  std::vector<double> out;
  if (v->find(':') != std::string::npos) {
    boost::algorithm::split(parts, *v, boost::is_any_of(":"));
    if (parts.size() != 3) fail(key, "grid must be start:step:stop");
    double g[3];
    for (int i = 0; i < 3; ++i) {
      bool ok = false;
      g[i] = parse_real(boost::algorithm::trim_copy(parts[i]), ok);
      if (!ok) fail(key, "grid entries must be real numbers");
    }
    if (!(g[1] > 0.0) || g[2] < g[0]) fail(key, "grid needs step > 0 and stop >= start");
    long n = std::lround(std::floor((g[2] - g[0]) / g[1] + 1e-9));
    if (n > 1000000) fail(key, "grid too large");
    for (long i = 0; i <= n; ++i) out.push_back(g[0] + static_cast<double>(i) * g[1]);
    return out;
  }
  boost::algorithm::split(parts, *v, boost::is_any_of(","));
  for (auto& p : parts) {
    bool ok = false;
    double x = parse_real(boost::algorithm::trim_copy(p), ok);
    if (!ok) fail(key, "expected a comma-separated list of reals");
    out.push_back(x);
  }
  return out;
}

void ConfigSection::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void ConfigSection::reject_unread() const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : entries_) {
    if (!read_.count(key)) unknown.push_back(key);
  }
  if (unknown.empty()) return;
  throw InvalidConfig("[" + name_ + "] unknown key(s): " +
                      boost::algorithm::join(unknown, ", "));
}

ConfigSection load_config(const std::filesystem::path& path,
                          const std::string& section) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    std::ostringstream msg;
    msg << e.filename() << ":" << e.line() << ": " << e.message();
    throw InvalidConfig(msg.str());
  }
  std::map<std::string, std::string> entries;
  for (const auto& [key, node] : tree) {
    // Top-level keys outside any section are not allowed; they would be
    // silently ignored otherwise.
    if (node.empty() && !node.data().empty()) {
      throw InvalidConfig(path.string() + ": key '" + key +
                          "' appears outside a section");
    }
  }
  if (auto child = tree.get_child_optional(section)) {
    for (const auto& [key, node] : *child) {
      entries[key] = boost::algorithm::trim_copy(node.data());
    }
  }
  return ConfigSection(section, std::move(entries));
}

}  // namespace qpercept
