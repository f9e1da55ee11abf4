#include "lotwatch/lotwatch.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "bench/bench.hpp"
#include "common/error.hpp"
#include "detection/detection.hpp"
#include "imaging/codec.hpp"
#include "imaging/image.hpp"
#include "patrol/scenario.hpp"
#include "recognizer/pipeline.hpp"
#include "service/config.hpp"
#include "service/service.hpp"
#include "synth/plate_synth.hpp"

using nlohmann::json;
namespace lw = lotwatch;

struct lw_context {
  lw::service::AppConfig cfg;
};

struct lw_image {
  lw::Image img;
};

struct lw_server {
  std::unique_ptr<lw::service::Service> svc;
};

namespace {

thread_local std::string g_last_error;

lw_status status_of(lw::ErrorCode code) {
  switch (code) {
    case lw::ErrorCode::invalid_argument: return LW_E_INVALID_ARGUMENT;
    case lw::ErrorCode::decode: return LW_E_DECODE;
    case lw::ErrorCode::io: return LW_E_IO;
    case lw::ErrorCode::not_found: return LW_E_NOT_FOUND;
    case lw::ErrorCode::config: return LW_E_CONFIG;
    case lw::ErrorCode::upstream: return LW_E_UPSTREAM;
    case lw::ErrorCode::unreadable: return LW_E_UNREADABLE;
    case lw::ErrorCode::internal: return LW_E_INTERNAL;
  }
  return LW_E_INTERNAL;
}

template <typename F>
lw_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return LW_OK;
  } catch (const lw::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON argument: ") + e.what();
    return LW_E_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LW_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LW_E_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw lw::Error(lw::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

json parse_optional(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return json::parse(text);
}

lw_image* wrap(lw::Image img) { return new lw_image{std::move(img)}; }

lw::PipelineConfig pipeline_for(const lw_context* ctx, const char* pipeline_json) {
  if (pipeline_json == nullptr || *pipeline_json == '\0') return ctx->cfg.bench_pipeline;
  return lw::pipeline_from_json(json::parse(pipeline_json));
}

std::string recognize_json(const lw_context* ctx, const char* pipeline_json, const lw::RecognitionInput& input) {
  const auto recognizer = lw::make_recognizer(pipeline_for(ctx, pipeline_json), ctx->cfg.lmm);
  return lw::service::to_json(recognizer->recognize(input)).dump();
}

}  // namespace

extern "C" {

const char* lw_version(void) { return "0.1.0"; }

const char* lw_status_string(lw_status status) {
  switch (status) {
    case LW_OK: return "ok";
    case LW_E_INVALID_ARGUMENT: return "invalid_argument";
    case LW_E_DECODE: return "decode";
    case LW_E_IO: return "io";
    case LW_E_NOT_FOUND: return "not_found";
    case LW_E_CONFIG: return "config";
    case LW_E_UPSTREAM: return "upstream";
    case LW_E_UNREADABLE: return "unreadable";
    case LW_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lw_last_error(void) { return g_last_error.c_str(); }

void lw_string_free(char* s) { std::free(s); }
void lw_buffer_free(uint8_t* buf) { std::free(buf); }

lw_status lw_context_create(const char* config_path, lw_context** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    auto ctx = std::make_unique<lw_context>();
    if (config_path != nullptr && *config_path != '\0') ctx->cfg = lw::service::load_config(config_path);
    *out = ctx.release();
  });
}

lw_status lw_context_create_json(const char* config_json, const char* base_dir, lw_context** out) {
  return guarded([&] {
    require(out != nullptr && config_json != nullptr, "null argument");
    json doc;
    try {
      doc = json::parse(config_json);
    } catch (const json::exception& e) {
      throw lw::Error(lw::ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
    }
    auto ctx = std::make_unique<lw_context>();
    ctx->cfg = lw::service::parse_config(doc, base_dir ? base_dir : "");
    *out = ctx.release();
  });
}

void lw_context_free(lw_context* ctx) { delete ctx; }

lw_status lw_context_config_json(const lw_context* ctx, char** out_json) {
  return guarded([&] {
    require(ctx && out_json, "null argument");
    *out_json = dup_string(lw::service::to_json(ctx->cfg).dump(2));
  });
}

lw_status lw_context_digest(const lw_context* ctx, char** out_hex) {
  return guarded([&] {
    require(ctx && out_hex, "null argument");
    *out_hex = dup_string(lw::service::config_digest(ctx->cfg));
  });
}

lw_status lw_image_decode(const uint8_t* data, size_t size, lw_image** out) {
  return guarded([&] {
    require(out && (data || size == 0), "null argument");
    *out = wrap(lw::imaging::decode_image({data, size}));
  });
}

lw_status lw_image_load(const char* path, lw_image** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = wrap(lw::imaging::load_image(path));
  });
}

lw_status lw_image_create(int width, int height, int channels, const uint8_t* data, lw_image** out) {
  return guarded([&] {
    require(out && data, "null argument");
    require(width > 0 && height > 0 && (channels == 1 || channels == 3), "bad image dimensions");
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    *out = wrap(lw::Image(width, height, channels, std::vector<std::uint8_t>(data, data + n)));
  });
}

void lw_image_free(lw_image* img) { delete img; }
int lw_image_width(const lw_image* img) { return img ? img->img.width() : 0; }
int lw_image_height(const lw_image* img) { return img ? img->img.height() : 0; }
int lw_image_channels(const lw_image* img) { return img ? img->img.channels() : 0; }
const uint8_t* lw_image_data(const lw_image* img) { return img ? img->img.data().data() : nullptr; }

lw_status lw_image_to_grayscale(const lw_image* img, lw_image** out) {
  return guarded([&] {
    require(img && out, "null argument");
    *out = wrap(lw::imaging::ensure_gray(img->img));
  });
}

lw_status lw_image_otsu_threshold(const lw_image* img, int* out_threshold) {
  return guarded([&] {
    require(img && out_threshold, "null argument");
    *out_threshold = lw::imaging::otsu_threshold(lw::imaging::histogram(lw::imaging::ensure_gray(img->img)));
  });
}

lw_status lw_image_binarize(const lw_image* img, int threshold, lw_image** out) {
  return guarded([&] {
    require(img && out, "null argument");
    *out = wrap(lw::imaging::binarize(lw::imaging::ensure_gray(img->img), threshold));
  });
}

lw_status lw_image_crop(const lw_image* img, int x, int y, int w, int h, lw_image** out) {
  return guarded([&] {
    require(img && out, "null argument");
    *out = wrap(lw::imaging::crop(img->img, lw::DetectionBox{x, y, w, h, 1.0}));
  });
}

lw_status lw_image_encode_png(const lw_image* img, uint8_t** out_buf, size_t* out_size) {
  return guarded([&] {
    require(img && out_buf && out_size, "null argument");
    const auto png = lw::imaging::encode_png(img->img);
    auto* buf = static_cast<uint8_t*>(std::malloc(png.size()));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, png.data(), png.size());
    *out_buf = buf;
    *out_size = png.size();
  });
}

lw_status lw_image_save_png(const lw_image* img, const char* path) {
  return guarded([&] {
    require(img && path, "null argument");
    lw::imaging::save_png(path, img->img);
  });
}

lw_status lw_recognize_file(const lw_context* ctx, const char* path, const char* pipeline_json,
                            char** out_result_json) {
  return guarded([&] {
    require(ctx && path && out_result_json, "null argument");
    *out_result_json = nullptr;
    if (!std::filesystem::is_regular_file(path)) throw lw::Error(lw::ErrorCode::not_found, std::string("no such file: ") + path);
    *out_result_json = dup_string(recognize_json(ctx, pipeline_json, lw::RecognitionInput::from_file(path)));
  });
}

lw_status lw_recognize_bytes(const lw_context* ctx, const uint8_t* data, size_t size, const char* pipeline_json,
                             char** out_result_json) {
  return guarded([&] {
    require(ctx && (data || size == 0) && out_result_json, "null argument");
    auto input = lw::RecognitionInput::from_bytes(std::vector<std::uint8_t>(data, data + size));
    *out_result_json = dup_string(recognize_json(ctx, pipeline_json, input));
  });
}

lw_status lw_synth_plate(const char* plate, const char* options_json, const char* out_png_path,
                         char** out_info_json) {
  return guarded([&] {
    require(plate && out_png_path, "null argument");
    const json opts = parse_optional(options_json);
    const auto normalized = lw::normalize_plate(plate);
    if (!normalized) throw lw::Error(lw::ErrorCode::invalid_argument, "not a valid plate: " + std::string(plate));
    const lw::synth::GlyphAtlas atlas(opts.value("cell_size", 3));
    auto rendered = lw::synth::render_plate(*normalized, atlas, opts.value("margin", 20));
    lw::synth::DegradeSpec spec;
    spec.noise_sigma = opts.value("noise_sigma", 0.0);
    spec.rotation_deg = opts.value("rotation_deg", 0.0);
    spec.blur_radius = opts.value("blur_radius", 0);
    spec.seed = opts.value("seed", std::uint64_t{0});
    lw::synth::validate(spec);
    const lw::Image out = lw::synth::degrade(rendered.image, spec);
    lw::imaging::save_png(out_png_path, out);
    lw::detection::write_sidecar(out_png_path, rendered.box);
    if (out_info_json) {
      const auto& b = rendered.box;
      const json info = {{"plate", normalized->str()},
                         {"path", out_png_path},
                         {"width", out.width()},
                         {"height", out.height()},
                         {"box", {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}}};
      *out_info_json = dup_string(info.dump());
    }
  });
}

lw_status lw_bench_run(const lw_context* ctx, const char* dataset_dir, const char* options_json, char** out_table,
                       char** out_summary_json) {
  return guarded([&] {
    require(ctx && dataset_dir && out_table, "null argument");
    const json opts = parse_optional(options_json);
    std::vector<lw::PipelineConfig> pipelines;
    if (opts.contains("pipelines")) {
      for (const auto& p : opts.at("pipelines")) pipelines.push_back(lw::pipeline_from_json(p));
    } else {
      pipelines.push_back(ctx->cfg.bench_pipeline);
    }
    require(!pipelines.empty(), "no pipelines to benchmark");

    lw::bench::BenchOptions bo;
    bo.repeats = opts.value("repeats", ctx->cfg.bench_repeats);
    bo.parallel = opts.value("parallel", false);
    require(bo.repeats >= 1, "repeats must be at least 1");
    lw::bench::TableFormat format = ctx->cfg.bench_format;
    if (opts.contains("format")) {
      const auto f = lw::bench::parse_table_format(opts.at("format").get<std::string>());
      require(f.has_value(), "format must be markdown or csv");
      format = *f;
    }

    const auto items = lw::bench::load_dataset(dataset_dir);
    const auto configs = lw::bench::configs_from(pipelines, ctx->cfg.lmm);
    const auto summaries = lw::bench::run_bench(items, configs, bo);
    const std::string table = lw::bench::emit_table(summaries, format, {.timing = !bo.parallel});
    std::string summary_text;
    if (out_summary_json) {
      json arr = json::array();
      for (const auto& s : summaries) arr.push_back(lw::bench::to_json(s));
      summary_text = arr.dump(2);
    }
    *out_table = dup_string(table);
    if (out_summary_json) *out_summary_json = dup_string(summary_text);
  });
}

lw_status lw_patrol_run(const lw_context* ctx, const char* scenario_path, char** out_report_json) {
  return guarded([&] {
    require(ctx && scenario_path && out_report_json, "null argument");
    const auto sc = lw::patrol::load_scenario(scenario_path);
    const auto run = lw::patrol::run_scenario(sc, ctx->cfg.lmm, ctx->cfg.notify, ctx->cfg.notify_legal);
    *out_report_json = dup_string(lw::patrol::to_json(run).dump(2));
  });
}

lw_status lw_server_create(const lw_context* ctx, lw_server** out) {
  return guarded([&] {
    require(ctx && out, "null argument");
    *out = new lw_server{std::make_unique<lw::service::Service>(ctx->cfg)};
  });
}

lw_status lw_server_load_registry(lw_server* srv) {
  return guarded([&] {
    require(srv, "null argument");
    srv->svc->load_registry();
  });
}

lw_status lw_server_bind(lw_server* srv, const char* host, int port, int* out_port) {
  return guarded([&] {
    require(srv, "null argument");
    const int p = srv->svc->bind(host ? host : srv->svc->config().host, port);
    if (out_port) *out_port = p;
  });
}

lw_status lw_server_listen(lw_server* srv) {
  return guarded([&] {
    require(srv, "null argument");
    srv->svc->listen();
  });
}

lw_status lw_server_stop(lw_server* srv) {
  return guarded([&] {
    require(srv, "null argument");
    srv->svc->stop();
  });
}

void lw_server_free(lw_server* srv) { delete srv; }

}  // extern "C"
