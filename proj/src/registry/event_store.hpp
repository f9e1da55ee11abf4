#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common/timeutil.hpp"
#include "recognizer/plate.hpp"
#include "registry/registry.hpp"

namespace lotwatch::registry {

struct PatrolEvent {
  std::uint64_t seq = 0;  // assigned by the store
  std::optional<PlateString> plate;
  std::string failure_reason;  // set iff plate is absent
  Timestamp captured_at{};
  std::string place;
  Verdict verdict = Verdict::unreadable;
  std::string backend;
  bool notified = false;

  bool operator==(const PatrolEvent&) const = default;
};

nlohmann::json to_json(const PatrolEvent& ev);
// Throws Error(decode) on missing or mistyped fields.
PatrolEvent event_from_json(const nlohmann::json& doc);

// Append-only JSON-lines log. Each append is a single write followed by
// fsync, so the file is always a sequence of complete lines plus at most
// one torn tail, which readers ignore and the next writer truncates.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path path);
  ~EventStore();
  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  // Assigns the next sequence number, persists, returns the number.
  // Throws Error(io) on storage failure.
  std::uint64_t record_event(PatrolEvent ev);

  std::vector<PatrolEvent> read_since(std::uint64_t seq) const;
  std::vector<PatrolEvent> read_all() const { return read_since(0); }
  const std::filesystem::path& path() const noexcept { return path_; }
  std::uint64_t last_seq() const;

  // Parses every complete line of a log file; a missing file is empty.
  static std::vector<PatrolEvent> read_log(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  int fd_ = -1;
  std::uint64_t next_seq_ = 1;
};

}  // namespace lotwatch::registry
