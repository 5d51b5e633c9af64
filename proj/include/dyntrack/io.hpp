#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dyntrack/errors.hpp"
#include "dyntrack/geometry.hpp"

namespace dyntrack {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  if (b < e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ParseError(what + ": cannot parse number '" + s + "'");
  return v;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex_digest(std::string_view data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// Flat key-value configuration:
///
///     # comment
///     section.key = value   # trailing comment
///
/// Keys are dotted paths; values are raw strings converted on access.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>") {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      const std::string key = trim(line.substr(0, eq));
      if (key.empty() && eq == std::string::npos) continue;
      if (eq == std::string::npos || key.empty()) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
  }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v != static_cast<double>(static_cast<std::int64_t>(v))) throw ParseError(key + ": expected an integer");
    return static_cast<std::int64_t>(v);
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ParseError(key + ": expected an unsigned integer, got '" + s + "'");
    }
    return v;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ParseError(key + ": expected a boolean, got '" + it->second + "'");
  }
  Vec3 get_vec3(const std::string& key, const Vec3& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto parts = split_numbers(it->second, key);
    if (parts.size() != 3) throw ParseError(key + ": expected three numbers");
    return {parts[0], parts[1], parts[2]};
  }
  std::vector<double> get_numbers(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? std::vector<double>{} : split_numbers(it->second, key);
  }

  /// Throws on any key missing from `allowed_keys`.
  void require_known(const std::vector<std::string>& allowed_keys) const {
    for (const auto& [k, v] : values_) {
      bool ok = false;
      for (const auto& a : allowed_keys) ok = ok || a == k;
      if (!ok) throw InvalidConfig("unknown config key '" + k + "'");
    }
  }

  /// Canonical text, one "key = value" per line in key order.
  std::string dump() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

 private:
  static std::vector<double> split_numbers(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::string tok;
    std::istringstream in(s);
    while (in >> tok) {
      for (auto& c : tok) if (c == ',' || c == ';') c = ' ';
      std::istringstream inner(tok);
      std::string piece;
      while (inner >> piece) out.push_back(parse_double(piece, key));
    }
    return out;
  }

  std::map<std::string, std::string> values_;
};

inline std::string format_vec3(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

}  // namespace dyntrack
