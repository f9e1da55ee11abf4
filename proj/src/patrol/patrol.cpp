#include "patrol/patrol.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace lotwatch::patrol {

const Slot* Lot::find(const std::string& id) const {
  for (const auto& s : slots) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Slot* Lot::find(const std::string& id) {
  return const_cast<Slot*>(static_cast<const Lot&>(*this).find(id));
}

std::size_t Lot::occupied() const {
  return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const Slot& s) { return s.occupant.has_value(); }));
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

PlateString random_plate(Rng& rng) {
  static constexpr std::string_view letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  std::string s;
  for (int i = 0; i < 3; ++i) s.push_back(letters[rng.below(26)]);
  const int digits = rng.below(2) == 0 ? 3 : 4;
  for (int i = 0; i < digits; ++i) s.push_back(static_cast<char>('0' + rng.below(10)));
  return *PlateString::from_normalized(s);
}

}  // namespace

Lot generate_lot(int n_slots, int n_occupied, const registry::Registry& reg, int n_illegal, std::uint64_t seed) {
  if (n_slots < 0 || n_occupied < 0 || n_illegal < 0 || n_illegal > n_occupied || n_occupied > n_slots) {
    throw Error(ErrorCode::invalid_argument, "lot counts must satisfy 0 <= illegal <= occupied <= slots");
  }
  const auto n_legal = static_cast<std::size_t>(n_occupied - n_illegal);
  if (reg.size() < n_legal) {
    throw Error(ErrorCode::invalid_argument,
                "registry holds " + std::to_string(reg.size()) + " plates, lot needs " + std::to_string(n_legal));
  }

  Rng rng(seed);
  Lot lot;
  lot.seed = seed;
  for (int i = 0; i < n_slots; ++i) {
    Slot s;
    s.row = i / 6;
    s.col = i % 6;
    s.id = std::string(1, static_cast<char>('A' + s.row % 26)) + std::to_string(s.col + 1);
    if (s.row >= 26) s.id += "-" + std::to_string(s.row / 26);
    lot.slots.push_back(std::move(s));
  }

  std::vector<std::size_t> order(lot.slots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);

  auto registered = reg.plates();
  shuffle(registered, rng);

  std::set<std::string> used;
  for (int k = 0; k < n_occupied; ++k) {
    Slot& slot = lot.slots[order[static_cast<std::size_t>(k)]];
    if (k < n_illegal) {
      PlateString p = random_plate(rng);
      while (reg.find(p) != nullptr || used.count(p.str())) p = random_plate(rng);
      slot.occupant = p;
    } else {
      slot.occupant = registered[static_cast<std::size_t>(k - n_illegal)];
    }
    used.insert(slot.occupant->str());
  }
  return lot;
}

SweepPlan SweepPlan::covering(const Lot& lot, std::vector<double> angles) {
  SweepPlan plan;
  for (const auto& s : lot.slots) plan.waypoints.push_back(s.id);
  plan.angles_per_stop = std::move(angles);
  return plan;
}

void SweepPlan::validate(const Lot& lot) const {
  if (angles_per_stop.empty()) throw Error(ErrorCode::invalid_argument, "sweep plan has no camera angles");
  const std::set<std::string> visited(waypoints.begin(), waypoints.end());
  for (const auto& s : lot.slots) {
    if (s.occupant && !visited.count(s.id)) {
      throw Error(ErrorCode::invalid_argument, "sweep plan never visits occupied slot " + s.id);
    }
  }
}

synth::DegradeSpec capture_degrade(const Lot& lot, const Slot& slot, double angle, const CaptureSettings& settings) {
  char tag[96];
  std::snprintf(tag, sizeof tag, "%s@%.3f", slot.id.c_str(), angle);
  const std::uint64_t seed = mix_seed(lot.seed, tag);
  if (slot.forced_degrade) {
    synth::DegradeSpec spec = *slot.forced_degrade;
    spec.seed = seed;
    return spec;
  }
  synth::DegradeSpec spec;
  spec.rotation_deg = std::clamp(angle * settings.angle_attenuation, -10.0, 10.0);
  spec.noise_sigma = settings.noise_sigma;
  spec.seed = seed;
  return spec;
}

CaptureEvent capture(const Lot& lot, const std::string& slot_id, double angle, Timestamp at,
                     const CaptureSettings& settings) {
  const Slot* slot = lot.find(slot_id);
  if (slot == nullptr) throw Error(ErrorCode::not_found, "unknown slot " + slot_id);
  if (!slot->occupant) throw Error(ErrorCode::not_found, "no vehicle");
  const synth::GlyphAtlas atlas(settings.cell_size);
  auto rendered = synth::render_plate(*slot->occupant, atlas, settings.margin);
  CaptureEvent ev;
  ev.slot_id = slot_id;
  ev.angle = angle;
  ev.image = synth::degrade(rendered.image, capture_degrade(lot, *slot, angle, settings));
  ev.truth_box = rendered.box;
  ev.at = at;
  return ev;
}

nlohmann::json to_json(const PatrolReport& report) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& ev : report.events) events.push_back(registry::to_json(ev));
  return {
      {"legal", report.legal},       {"illegal", report.illegal}, {"unreadable", report.unreadable},
      {"empty", report.empty},       {"events", events},          {"errors", report.errors},
  };
}

PatrolReport run_patrol(const Lot& lot, const SweepPlan& plan, const Recognizer& recognizer,
                        const registry::Registry& reg, notify::Notifier& notifier, registry::EventStore& store,
                        const PatrolOptions& options) {
  plan.validate(lot);
  PatrolReport report;
  for (std::size_t w = 0; w < plan.waypoints.size(); ++w) {
    const std::string& id = plan.waypoints[w];
    const Timestamp at = options.start + options.step * static_cast<long>(w);
    const Slot* slot = lot.find(id);
    if (slot == nullptr) {
      report.errors.push_back(id + ": unknown slot");
      continue;
    }
    if (!slot->occupant) {
      ++report.empty;
      continue;
    }

    std::optional<PlateString> plate;
    std::string failure = "no capture";
    for (double angle : plan.angles_per_stop) {
      try {
        const auto cap = capture(lot, id, angle, at, options.capture);
        const auto result = recognizer.recognize(RecognitionInput::from_image(cap.image, cap.truth_box));
        if (result.ok()) {
          plate = result.plate;
          break;
        }
        failure = result.failure_stage;
        if (!result.failure_detail.empty()) failure += ": " + result.failure_detail;
      } catch (const std::exception& e) {
        failure = "error";
        report.errors.push_back(id + ": " + e.what());
      }
    }

    registry::PatrolEvent ev;
    ev.plate = plate;
    ev.captured_at = at;
    ev.place = id;
    ev.backend = recognizer.summary();
    if (plate) {
      ev.verdict = registry::check_legality(reg, *plate, at);
    } else {
      ev.verdict = registry::Verdict::unreadable;
      ev.failure_reason = failure;
    }
    ev.notified = ev.verdict != registry::Verdict::legal || options.notify_legal;

    switch (ev.verdict) {
      case registry::Verdict::legal: ++report.legal; break;
      case registry::Verdict::illegal: ++report.illegal; break;
      case registry::Verdict::unreadable: ++report.unreadable; break;
    }

    try {
      ev.seq = store.record_event(ev);
    } catch (const std::exception& e) {
      report.errors.push_back(id + ": event not recorded: " + e.what());
    }
    if (ev.notified) {
      try {
        notifier.enqueue(notify::format_message(ev, options.recipient));
      } catch (const std::exception& e) {
        report.errors.push_back(id + ": notification not queued: " + e.what());
      }
    }
    report.events.push_back(std::move(ev));
  }
  return report;
}

}  // namespace lotwatch::patrol
