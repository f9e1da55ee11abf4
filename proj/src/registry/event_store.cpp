#include "registry/event_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace lotwatch::registry {

nlohmann::json to_json(const PatrolEvent& ev) {
  nlohmann::json doc;
  doc["seq"] = ev.seq;
  doc["plate"] = ev.plate ? nlohmann::json(ev.plate->str()) : nlohmann::json(nullptr);
  doc["failure_reason"] = ev.failure_reason;
  doc["captured_at"] = format_iso8601(ev.captured_at);
  doc["place"] = ev.place;
  doc["verdict"] = std::string(to_string(ev.verdict));
  doc["backend"] = ev.backend;
  doc["notified"] = ev.notified;
  return doc;
}

PatrolEvent event_from_json(const nlohmann::json& doc) {
  try {
    PatrolEvent ev;
    ev.seq = doc.at("seq").get<std::uint64_t>();
    if (!doc.at("plate").is_null()) {
      ev.plate = PlateString::from_normalized(doc.at("plate").get<std::string>());
      if (!ev.plate) throw Error(ErrorCode::decode, "event has an invalid plate");
    }
    ev.failure_reason = doc.value("failure_reason", "");
    const auto at = parse_iso8601(doc.at("captured_at").get<std::string>());
    if (!at) throw Error(ErrorCode::decode, "event has an invalid captured_at");
    ev.captured_at = *at;
    ev.place = doc.at("place").get<std::string>();
    const auto verdict = parse_verdict(doc.at("verdict").get<std::string>());
    if (!verdict) throw Error(ErrorCode::decode, "event has an invalid verdict");
    ev.verdict = *verdict;
    ev.backend = doc.value("backend", "");
    ev.notified = doc.value("notified", false);
    return ev;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::decode, std::string("malformed event record: ") + e.what());
  }
}

namespace {

// Complete lines of the file and the byte length they cover.
std::pair<std::vector<std::string>, std::size_t> complete_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {{}, 0};
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (true) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return {std::move(lines), pos};
}

}  // namespace

std::vector<PatrolEvent> EventStore::read_log(const std::filesystem::path& path) {
  std::vector<PatrolEvent> out;
  for (const auto& line : complete_lines(path).first) {
    if (line.empty()) continue;
    try {
      out.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::decode, "corrupt event log line in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

EventStore::EventStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  const auto [lines, good_bytes] = complete_lines(path_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::io, "cannot open event log " + path_.string() + ": " + std::strerror(errno));
  // Drop a torn tail left by an interrupted append.
  if (::ftruncate(fd_, static_cast<off_t>(good_bytes)) != 0) {
    ::close(fd_);
    throw Error(ErrorCode::io, "cannot truncate event log " + path_.string());
  }
  for (const auto& ev : read_log(path_)) next_seq_ = std::max(next_seq_, ev.seq + 1);
}

EventStore::~EventStore() {
  if (fd_ >= 0) ::close(fd_);
}

std::uint64_t EventStore::record_event(PatrolEvent ev) {
  std::lock_guard lock(mu_);
  ev.seq = next_seq_;
  const std::string line = to_json(ev).dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::io, "event log write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(ErrorCode::io, "event log fsync failed: " + std::string(std::strerror(errno)));
  return next_seq_++;
}

std::vector<PatrolEvent> EventStore::read_since(std::uint64_t seq) const {
  std::lock_guard lock(mu_);
  std::vector<PatrolEvent> out;
  for (auto& ev : read_log(path_)) {
    if (ev.seq > seq) out.push_back(std::move(ev));
  }
  return out;
}

std::uint64_t EventStore::last_seq() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

}  // namespace lotwatch::registry
