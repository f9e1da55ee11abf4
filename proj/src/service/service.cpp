#include "service/service.hpp"

#include <thread>

#include <httplib.h>

#include "common/error.hpp"
#include "common/http.hpp"
#include "patrol/scenario.hpp"
#include "registry/event_store.hpp"
#include "registry/registry.hpp"

namespace lotwatch::service {

using nlohmann::json;

json ApiError::to_json() const { return {{"code", code}, {"message", message}, {"stage", stage}}; }

json to_json(const RecognitionResult& r) {
  json doc;
  doc["plate"] = r.plate ? json(r.plate->str()) : json(nullptr);
  doc["raw_text"] = r.raw_text;
  doc["backend"] = r.backend;
  doc["timing_s"] = r.timing_s;
  doc["attempts"] = r.attempts;
  if (!r.ok()) doc["failure"] = {{"stage", r.failure_stage}, {"detail", r.failure_detail}};
  if (r.box) doc["box"] = {{"x", r.box->x}, {"y", r.box->y}, {"w", r.box->w}, {"h", r.box->h}, {"confidence", r.box->confidence}};
  if (!r.char_confidence.empty()) doc["char_confidence"] = r.char_confidence;
  if (r.lmm_phases) {
    doc["lmm_phases"] = {{"load", r.lmm_phases->load},
                         {"call", r.lmm_phases->call},
                         {"parse", r.lmm_phases->parse},
                         {"total", r.lmm_phases->total}};
  }
  return doc;
}

ApiError api_error_for(const RecognitionResult& r) {
  if (r.failure_stage == "decode") return {"decode", r.failure_detail, "decode", 400};
  if (r.failure_stage == "lmm") return {"upstream", r.failure_detail, "lmm", 502};
  return {"unreadable", r.failure_detail, r.failure_stage, 422};
}

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::decode:
    case ErrorCode::config: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::unreadable: return 422;
    case ErrorCode::upstream: return 502;
    case ErrorCode::io:
    case ErrorCode::internal: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& err) { send_json(res, err.http_status, err.to_json()); }

}  // namespace

struct Service::Impl {
  AppConfig cfg;
  Sleeper sleeper;
  registry::RegistryHandle registry;
  httplib::Server server;
  std::thread thread;
  bool bound = false;

  void routes();
  void recognize(const httplib::Request& req, httplib::Response& res);
  void patrol(const httplib::Request& req, httplib::Response& res);
  void events(const httplib::Request& req, httplib::Response& res);
  void health(const httplib::Request& req, httplib::Response& res);
};

void Service::Impl::routes() {
  server.Post("/v1/recognize", [this](const httplib::Request& q, httplib::Response& r) { recognize(q, r); });
  server.Post("/v1/patrol", [this](const httplib::Request& q, httplib::Response& r) { patrol(q, r); });
  server.Get("/v1/events", [this](const httplib::Request& q, httplib::Response& r) { events(q, r); });
  server.Get("/healthz", [this](const httplib::Request& q, httplib::Response& r) { health(q, r); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, {std::string(to_string(e.code())), e.what(), "", status_for(e.code())});
    } catch (const std::exception& e) {
      send_error(res, {"internal", e.what(), "", 500});
    }
  });
}

void Service::Impl::recognize(const httplib::Request& req, httplib::Response& res) {
  const bool is_json = req.get_header_value("Content-Type").rfind("application/json", 0) == 0;
  json body;
  std::vector<std::uint8_t> image;
  std::optional<DetectionBox> annotation;
  try {
    if (is_json) {
      body = json::parse(req.body);
      const std::string raw = base64_decode(body.at("image_base64").get<std::string>());
      image.assign(raw.begin(), raw.end());
      if (body.contains("annotation")) {
        const auto& a = body.at("annotation");
        annotation = DetectionBox{a.at("x").get<int>(), a.at("y").get<int>(), a.at("w").get<int>(), a.at("h").get<int>(), 1.0};
      }
    } else {
      image.assign(req.body.begin(), req.body.end());
    }
  } catch (const std::exception& e) {
    send_error(res, {"bad_request", std::string("cannot read request body: ") + e.what(), "request", 400});
    return;
  }
  const json* jb = is_json ? &body : nullptr;

  PipelineConfig pc;
  try {
    json sel = jb ? *jb : json::object();
    sel.erase("image_base64");
    sel.erase("annotation");
    for (const char* key : {"backend", "detector", "ocr", "variant"}) {
      if (!sel.contains(key) && req.has_param(key)) sel[key] = req.get_param_value(key);
    }
    if (sel.contains("external_detector_url") || sel.contains("external_ocr")) {
      send_error(res, {"bad_request", "external backends are configured server-side", "request", 400});
      return;
    }
    if (!cfg.bench_pipeline.external_detector_url.empty()) {
      sel["external_detector_url"] = cfg.bench_pipeline.external_detector_url;
    }
    if (!cfg.bench_pipeline.external_ocr_target.empty()) sel["external_ocr"] = cfg.bench_pipeline.external_ocr_target;
    pc = pipeline_from_json(sel);
  } catch (const std::exception& e) {
    send_error(res, {"bad_request", e.what(), "request", 400});
    return;
  }
  const auto recognizer = make_recognizer(pc, cfg.lmm, sleeper);
  RecognitionInput input = RecognitionInput::from_bytes(std::move(image));
  input.annotation = annotation;
  const auto result = recognizer->recognize(input);
  if (result.ok()) {
    send_json(res, 200, to_json(result));
  } else {
    json doc = api_error_for(result).to_json();
    doc["result"] = to_json(result);
    res.status = api_error_for(result).http_status;
    res.set_content(doc.dump(), "application/json");
  }
}

void Service::Impl::patrol(const httplib::Request& req, httplib::Response& res) {
  json doc;
  try {
    doc = json::parse(req.body);
  } catch (const json::exception& e) {
    send_error(res, {"bad_request", std::string("scenario is not valid JSON: ") + e.what(), "request", 400});
    return;
  }
  if (!doc.is_object()) {
    send_error(res, {"bad_request", "scenario must be a JSON object", "request", 400});
    return;
  }
  if (!doc.contains("registry")) doc["registry"] = cfg.registry_path.string();
  if (!doc.contains("event_log")) doc["event_log"] = cfg.event_log_path.string();
  const auto sc = patrol::parse_scenario(doc, {});
  const auto run = patrol::run_scenario(sc, cfg.lmm, cfg.notify, cfg.notify_legal, sleeper);
  send_json(res, 200, patrol::to_json(run));
}

void Service::Impl::events(const httplib::Request& req, httplib::Response& res) {
  std::uint64_t since = 0;
  if (req.has_param("since")) {
    try {
      since = std::stoull(req.get_param_value("since"));
    } catch (const std::exception&) {
      send_error(res, {"bad_request", "since must be a non-negative integer", "request", 400});
      return;
    }
  }
  json events = json::array();
  for (const auto& ev : registry::EventStore::read_log(cfg.event_log_path)) {
    if (ev.seq > since) events.push_back(registry::to_json(ev));
  }
  send_json(res, 200, {{"events", events}});
}

void Service::Impl::health(const httplib::Request&, httplib::Response& res) {
  const auto reg = registry.get();
  if (!reg) {
    send_json(res, 503, {{"status", "not_ready"}, {"config_digest", config_digest(cfg)}});
    return;
  }
  send_json(res, 200, {{"status", "ok"}, {"config_digest", config_digest(cfg)}, {"registry_size", reg->size()}});
}

Service::Service(AppConfig cfg, Sleeper sleeper) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = std::move(cfg);
  impl_->sleeper = std::move(sleeper);
  impl_->routes();
}

Service::~Service() { stop(); }

void Service::load_registry() { impl_->registry.reload(impl_->cfg.registry_path); }

bool Service::ready() const { return impl_->registry.loaded(); }

int Service::bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port < 0) throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->bound = true;
  return bound_port;
}

void Service::listen() { impl_->server.listen_after_bind(); }

int Service::start(const std::string& host, int port) {
  const int p = bind(host, port);
  impl_->thread = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return p;
}

void Service::stop() {
  if (impl_->bound) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->bound = false;
}

const AppConfig& Service::config() const { return impl_->cfg; }

}  // namespace lotwatch::service
