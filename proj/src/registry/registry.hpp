#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/timeutil.hpp"
#include "recognizer/plate.hpp"

namespace lotwatch::registry {

struct RegistryEntry {
  PlateString plate;
  std::string owner_label;
  std::optional<Timestamp> valid_from;
  std::optional<Timestamp> valid_to;
};

enum class Verdict { legal, illegal, unreadable };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

// Immutable plate whitelist keyed by normalized plate.
class Registry {
 public:
  Registry() = default;
  // Throws Error(config) on a duplicate plate or valid_from > valid_to.
  explicit Registry(std::vector<RegistryEntry> entries);

  // One record per line: plate,owner,valid_from,valid_to. Trailing fields
  // may be omitted or empty; blank lines and '#' comments are skipped, as is
  // a leading "plate,..." header. Dates may be bare (YYYY-MM-DD); a bare
  // valid_to lasts until the end of that day. Errors carry origin:line.
  static Registry parse(std::string_view text, std::string_view origin = "<registry>");

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const RegistryEntry* find(const PlateString& plate) const;
  std::vector<PlateString> plates() const;

 private:
  std::map<std::string, RegistryEntry> entries_;
};

Registry load_registry(const std::filesystem::path& path);

// legal iff the plate is registered and `at` falls inside its validity
// window (absent bounds are open).
Verdict check_legality(const Registry& reg, const PlateString& plate, Timestamp at);

// Shared, swappable registry: readers take a snapshot, reload replaces it
// atomically.
class RegistryHandle {
 public:
  std::shared_ptr<const Registry> get() const;
  bool loaded() const;
  void replace(Registry reg);
  void reload(const std::filesystem::path& path) { replace(load_registry(path)); }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const Registry> current_;
};

}  // namespace lotwatch::registry
