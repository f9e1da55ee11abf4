/* lotwatch C API.
 *
 * Every function returns an lw_status; on failure lw_last_error() describes
 * the problem (thread-local, valid until the next call on the same thread).
 * Strings and buffers handed out by the library are released with
 * lw_string_free / lw_buffer_free. Structured results are JSON documents.
 */
#ifndef LOTWATCH_LOTWATCH_H
#define LOTWATCH_LOTWATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(LW_BUILDING_LIBRARY)
#define LW_API __attribute__((visibility("default")))
#else
#define LW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lw_status {
  LW_OK = 0,
  LW_E_INVALID_ARGUMENT = 1,
  LW_E_DECODE = 2,
  LW_E_IO = 3,
  LW_E_NOT_FOUND = 4,
  LW_E_CONFIG = 5,
  LW_E_UPSTREAM = 6,
  LW_E_UNREADABLE = 7,
  LW_E_INTERNAL = 8
} lw_status;

LW_API const char* lw_version(void);
LW_API const char* lw_status_string(lw_status status);
LW_API const char* lw_last_error(void);

LW_API void lw_string_free(char* s);
LW_API void lw_buffer_free(uint8_t* buf);

/* Configuration context. A NULL path yields built-in defaults. */
typedef struct lw_context lw_context;

LW_API lw_status lw_context_create(const char* config_path, lw_context** out);
/* base_dir resolves relative paths inside the document; may be NULL. */
LW_API lw_status lw_context_create_json(const char* config_json, const char* base_dir, lw_context** out);
LW_API void lw_context_free(lw_context* ctx);
/* Effective configuration (secrets appear only as env var names). */
LW_API lw_status lw_context_config_json(const lw_context* ctx, char** out_json);
LW_API lw_status lw_context_digest(const lw_context* ctx, char** out_hex);

/* 8-bit raster, 1 (gray) or 3 (RGB) interleaved channels. */
typedef struct lw_image lw_image;

LW_API lw_status lw_image_decode(const uint8_t* data, size_t size, lw_image** out);
LW_API lw_status lw_image_load(const char* path, lw_image** out);
LW_API lw_status lw_image_create(int width, int height, int channels, const uint8_t* data, lw_image** out);
LW_API void lw_image_free(lw_image* img);
LW_API int lw_image_width(const lw_image* img);
LW_API int lw_image_height(const lw_image* img);
LW_API int lw_image_channels(const lw_image* img);
LW_API const uint8_t* lw_image_data(const lw_image* img);

LW_API lw_status lw_image_to_grayscale(const lw_image* img, lw_image** out);
LW_API lw_status lw_image_otsu_threshold(const lw_image* img, int* out_threshold);
/* Pixels strictly above threshold become 255, the rest 0. */
LW_API lw_status lw_image_binarize(const lw_image* img, int threshold, lw_image** out);
LW_API lw_status lw_image_crop(const lw_image* img, int x, int y, int w, int h, lw_image** out);
LW_API lw_status lw_image_encode_png(const lw_image* img, uint8_t** out_buf, size_t* out_size);
LW_API lw_status lw_image_save_png(const lw_image* img, const char* path);

/* Recognition. pipeline_json selects the backend, e.g.
 *   {"backend":"dual","detector":"heuristic","ocr":"baseline","variant":"binary"}
 * or {"backend":"lmm"}; NULL uses the context's configured pipeline.
 * The call succeeds whenever a result document was produced; an unreadable
 * plate is reported inside it ("plate": null plus "failure"). */
LW_API lw_status lw_recognize_file(const lw_context* ctx, const char* path, const char* pipeline_json,
                                   char** out_result_json);
LW_API lw_status lw_recognize_bytes(const lw_context* ctx, const uint8_t* data, size_t size,
                                    const char* pipeline_json, char** out_result_json);

/* Renders a synthetic plate to out_png_path and writes the ground-truth box
 * sidecar next to it. options_json (may be NULL):
 *   {"cell_size":3,"margin":20,"noise_sigma":0,"rotation_deg":0,"blur_radius":0,"seed":0}
 * out_info_json receives {"plate","path","box":{...}}; may be NULL. */
LW_API lw_status lw_synth_plate(const char* plate, const char* options_json, const char* out_png_path,
                                char** out_info_json);

/* Benchmark over a directory of images named by their plate. options_json:
 *   {"pipelines":[{...}, ...],"repeats":1,"parallel":false,"format":"markdown"}
 * Missing "pipelines" uses the context's configured pipeline. out_table
 * receives the rendered tables; out_summary_json (may be NULL) the per
 * configuration summaries. */
LW_API lw_status lw_bench_run(const lw_context* ctx, const char* dataset_dir, const char* options_json,
                              char** out_table, char** out_summary_json);

/* Runs a patrol scenario file; out_report_json receives the report,
 * delivery records and dry-run notifications. */
LW_API lw_status lw_patrol_run(const lw_context* ctx, const char* scenario_path, char** out_report_json);

/* HTTP service. */
typedef struct lw_server lw_server;

LW_API lw_status lw_server_create(const lw_context* ctx, lw_server** out);
LW_API lw_status lw_server_load_registry(lw_server* srv);
/* port 0 picks a free port; out_port may be NULL. */
LW_API lw_status lw_server_bind(lw_server* srv, const char* host, int port, int* out_port);
/* Blocks until lw_server_stop is called from another thread. */
LW_API lw_status lw_server_listen(lw_server* srv);
LW_API lw_status lw_server_stop(lw_server* srv);
LW_API void lw_server_free(lw_server* srv);

#ifdef __cplusplus
}
#endif

#endif
