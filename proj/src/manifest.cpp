#include "fleetpdm/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fleetpdm/rng.hpp"

namespace fleetpdm {

void Manifest::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void Manifest::set(std::string key, std::int64_t value) {
  set(std::move(key), std::to_string(value));
}

void Manifest::set(std::string key, std::uint64_t value) {
  set(std::move(key), std::to_string(value));
}

void Manifest::set(std::string key, double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  set(std::move(key), std::string(buf));
}

std::optional<std::string> Manifest::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  if (!out) throw std::runtime_error("manifest write failed: " + path);
}

Manifest Manifest::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed manifest line: " + line);
    m.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

std::string file_checksum_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot checksum missing file: " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace fleetpdm
