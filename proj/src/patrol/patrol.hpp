#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common/timeutil.hpp"
#include "imaging/image.hpp"
#include "notify/notify.hpp"
#include "recognizer/pipeline.hpp"
#include "registry/event_store.hpp"
#include "registry/registry.hpp"
#include "synth/plate_synth.hpp"

namespace lotwatch::patrol {

struct Slot {
  std::string id;
  int row = 0;
  int col = 0;
  std::optional<PlateString> occupant;
  // Replaces the angle-derived degradation for every capture of this slot.
  std::optional<synth::DegradeSpec> forced_degrade;
};

struct Lot {
  std::vector<Slot> slots;
  std::uint64_t seed = 0;

  const Slot* find(const std::string& id) const;
  Slot* find(const std::string& id);
  std::size_t occupied() const;
};

// Slots are laid out in rows of six ("A1".."A6", "B1", ...). The seed picks
// which slots are occupied, which registry plates park legally and the
// unregistered plates of the n_illegal remaining occupants.
// Throws Error(invalid_argument) unless n_illegal <= n_occupied <= n_slots
// and the registry holds at least n_occupied - n_illegal plates.
Lot generate_lot(int n_slots, int n_occupied, const registry::Registry& reg, int n_illegal, std::uint64_t seed);

struct SweepPlan {
  std::vector<std::string> waypoints;
  std::vector<double> angles_per_stop;

  // Visits every slot in lot order.
  static SweepPlan covering(const Lot& lot, std::vector<double> angles);
  // Throws Error(invalid_argument) if an occupied slot is never visited or
  // the angle list is empty.
  void validate(const Lot& lot) const;
};

struct CaptureSettings {
  int cell_size = 3;
  int margin = 20;
  double angle_attenuation = 0.1;  // plate rotation (deg) per camera degree
  double noise_sigma = 3.0;
};

struct CaptureEvent {
  std::string slot_id;
  double angle = 0.0;
  Image image;
  DetectionBox truth_box;
  Timestamp at{};
};

synth::DegradeSpec capture_degrade(const Lot& lot, const Slot& slot, double angle, const CaptureSettings& settings);

// Renders the occupant's plate as seen from `angle`. Deterministic in
// (lot seed, slot, angle). Throws Error(not_found, "no vehicle") for an
// empty slot.
CaptureEvent capture(const Lot& lot, const std::string& slot_id, double angle, Timestamp at,
                     const CaptureSettings& settings = {});

struct PatrolOptions {
  Timestamp start{};
  std::chrono::seconds step{30};
  bool notify_legal = true;
  std::string recipient = "manager";
  CaptureSettings capture;
};

struct PatrolReport {
  int legal = 0;
  int illegal = 0;
  int unreadable = 0;
  int empty = 0;
  std::vector<registry::PatrolEvent> events;
  std::vector<std::string> errors;  // per-slot collaborator failures
};

nlohmann::json to_json(const PatrolReport& report);

// Visits waypoints in order; at each occupied slot tries the angles until a
// capture yields a plate, then records the event and queues its
// notification. Simulated time advances by `step` per waypoint.
PatrolReport run_patrol(const Lot& lot, const SweepPlan& plan, const Recognizer& recognizer,
                        const registry::Registry& reg, notify::Notifier& notifier, registry::EventStore& store,
                        const PatrolOptions& options);

}  // namespace lotwatch::patrol
