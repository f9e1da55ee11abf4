#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recognizer/pipeline.hpp"
#include "recognizer/plate.hpp"

namespace lotwatch::bench {

struct DatasetItem {
  std::filesystem::path image_path;
  PlateString truth;  // from the file stem
};

// Every .png/.jpg/.jpeg file in `dir` (non-recursive), sorted by file name.
// The stem goes through normalize_plate (so "abc-1234.png" is ABC1234).
// Throws Error(not_found) for a missing or image-less directory and
// Error(invalid_argument) listing every stem that is not a plate.
std::vector<DatasetItem> load_dataset(const std::filesystem::path& dir);

struct EvalRecord {
  std::string image_name;
  PlateString truth;
  std::optional<PlateString> prediction;
  std::string failure;  // failure stage when prediction is absent
  bool exact_match = false;
  int char_correct = 0;
  int char_total = 0;
  double elapsed_s = 0.0;
  int attempts = 1;
};

int levenshtein(std::string_view a, std::string_view b);

// Equal lengths: positional matches. Otherwise |truth| - edit distance,
// floored at 0. Failures score 0 / |truth|.
EvalRecord score(const DatasetItem& item, const RecognitionResult& result);

struct BenchSummary {
  std::string model;                  // row label, e.g. "heuristic + baseline"
  std::optional<RoiVariant> variant;  // absent: full original image
  std::size_t n_images = 0;
  std::size_t exact_count = 0;
  double mean_char_accuracy = 0.0;     // percent
  std::optional<double> mean_time_s;   // absent when timing was not measured
  std::size_t timed_runs = 0;
  double mean_attempts = 0.0;
  bool aborted = false;
  std::string diagnostic;

  // 100 * exact_count / n_images.
  double exact_match_rate() const;

  static BenchSummary from_counts(std::string model, std::optional<RoiVariant> variant, std::size_t n,
                                  std::size_t exact, double mean_time_s);
};

struct BenchConfig {
  std::string label;  // used for diagnostics when construction fails
  std::function<std::unique_ptr<Recognizer>()> make;
};

struct BenchOptions {
  int repeats = 1;
  // Accuracy-only run across threads; timing columns are not reported.
  bool parallel = false;
};

// Runs every config over every item. Accuracy comes from the first repeat;
// mean time averages every (item, repeat) run. A config whose construction
// throws yields an aborted summary and the remaining configs still run.
std::vector<BenchSummary> run_bench(std::span<const DatasetItem> items, std::span<const BenchConfig> configs,
                                    const BenchOptions& options = {},
                                    std::vector<std::vector<EvalRecord>>* records = nullptr);

// Convenience: one BenchConfig per PipelineConfig.
std::vector<BenchConfig> configs_from(std::span<const PipelineConfig> pipelines, const lmm::LmmConfig& lmm_cfg);

enum class TableFormat { markdown, csv };

std::optional<TableFormat> parse_table_format(std::string_view text);

struct EmitOptions {
  bool timing = true;  // false renders "-" in time columns
};

// Comparison table (one row per model; original, original ROI, gray ROI,
// binary ROI, time) followed by a per-configuration detail table. "X" marks
// cells that do not apply to a model.
std::string emit_table(std::span<const BenchSummary> summaries, TableFormat format, const EmitOptions& options = {});

nlohmann::json to_json(const BenchSummary& s);

// "54" for integral values, "54.17" otherwise.
std::string format_percent(double value);

}  // namespace lotwatch::bench
