#include "registry/registry.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace lotwatch::registry {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::legal: return "legal";
    case Verdict::illegal: return "illegal";
    case Verdict::unreadable: return "unreadable";
  }
  return "unreadable";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  if (text == "legal") return Verdict::legal;
  if (text == "illegal") return Verdict::illegal;
  if (text == "unreadable") return Verdict::unreadable;
  return std::nullopt;
}

Registry::Registry(std::vector<RegistryEntry> entries) {
  for (auto& e : entries) {
    if (e.valid_from && e.valid_to && *e.valid_from > *e.valid_to) {
      throw Error(ErrorCode::config, "registry entry " + e.plate.str() + " has valid_from after valid_to");
    }
    const std::string key = e.plate.str();
    if (!entries_.emplace(key, std::move(e)).second) {
      throw Error(ErrorCode::config, "duplicate plate in registry: " + key);
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Registry Registry::parse(std::string_view text, std::string_view origin) {
  std::vector<RegistryEntry> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_record = false;
  std::set<std::string> seen_plates;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    const auto fields = split_commas(line);
    if (!seen_record && (fields[0] == "plate" || fields[0] == "PLATE" || fields[0] == "Plate")) {
      seen_record = true;
      continue;
    }
    seen_record = true;
    if (fields.size() > 4) throw Error(ErrorCode::config, where + "expected at most 4 fields");

    auto plate = normalize_plate(fields[0]);
    if (!plate) throw Error(ErrorCode::config, where + "invalid plate '" + std::string(fields[0]) + "'");
    RegistryEntry e{*plate, fields.size() > 1 ? std::string(fields[1]) : std::string(), std::nullopt, std::nullopt};
    auto parse_bound = [&](std::size_t idx, std::optional<Timestamp>& dst) {
      if (fields.size() <= idx || fields[idx].empty()) return;
      dst = parse_iso8601(fields[idx]);
      if (!dst) throw Error(ErrorCode::config, where + "invalid timestamp '" + std::string(fields[idx]) + "'");
    };
    parse_bound(2, e.valid_from);
    parse_bound(3, e.valid_to);
    // A bare date as the upper bound covers that whole day.
    if (e.valid_to && trim(fields[3]).size() == 10) *e.valid_to += std::chrono::seconds(86399);
    if (e.valid_from && e.valid_to && *e.valid_from > *e.valid_to) {
      throw Error(ErrorCode::config, where + "valid_from is after valid_to");
    }
    if (!seen_plates.insert(e.plate.str()).second) {
      throw Error(ErrorCode::config, where + "duplicate plate " + e.plate.str());
    }
    entries.push_back(std::move(e));
  }
  return Registry(std::move(entries));
}

const RegistryEntry* Registry::find(const PlateString& plate) const {
  const auto it = entries_.find(plate.str());
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<PlateString> Registry::plates() const {
  std::vector<PlateString> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e.plate);
  return out;
}

Registry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "cannot open registry " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Registry::parse(ss.str(), path.string());
}

Verdict check_legality(const Registry& reg, const PlateString& plate, Timestamp at) {
  const auto* e = reg.find(plate);
  if (e == nullptr) return Verdict::illegal;
  if (e->valid_from && at < *e->valid_from) return Verdict::illegal;
  if (e->valid_to && at > *e->valid_to) return Verdict::illegal;
  return Verdict::legal;
}

std::shared_ptr<const Registry> RegistryHandle::get() const {
  std::lock_guard lock(mu_);
  return current_;
}

bool RegistryHandle::loaded() const {
  std::lock_guard lock(mu_);
  return current_ != nullptr;
}

void RegistryHandle::replace(Registry reg) {
  auto next = std::make_shared<const Registry>(std::move(reg));
  std::lock_guard lock(mu_);
  current_ = std::move(next);
}

}  // namespace lotwatch::registry
