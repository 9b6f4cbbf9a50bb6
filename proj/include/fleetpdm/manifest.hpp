// Flat key=value manifests. Every CLI command and the generator write one
// so a run can be reproduced from its recorded config, seeds and checksums.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fleetpdm {

class Manifest {
 public:
  void set(std::string key, std::string value);
  void set(std::string key, const char* value) { set(std::move(key), std::string(value)); }
  void set(std::string key, std::int64_t value);
  void set(std::string key, std::uint64_t value);
  void set(std::string key, int value) { set(std::move(key), static_cast<std::int64_t>(value)); }
  void set(std::string key, bool value) { set(std::move(key), std::string(value ? "true" : "false")); }
  // %.17g, enough digits for an exact double round trip.
  void set(std::string key, double value);

  std::optional<std::string> get(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(const std::string& path) const;
  static Manifest read(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// FNV-1a 64-bit checksum of a file's bytes, as fixed-width hex.
std::string file_checksum_hex(const std::string& path);

}  // namespace fleetpdm
