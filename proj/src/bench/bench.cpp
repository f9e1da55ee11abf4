#include "bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <thread>

#include "common/error.hpp"

namespace lotwatch::bench {

namespace fs = std::filesystem;

std::vector<DatasetItem> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::not_found, "dataset directory not found: " + dir.string());
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") images.push_back(entry.path());
  }
  if (images.empty()) throw Error(ErrorCode::not_found, "no images in dataset directory " + dir.string());
  std::sort(images.begin(), images.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::vector<DatasetItem> items;
  std::string offenders;
  for (const auto& p : images) {
    if (auto truth = normalize_plate(p.stem().string())) {
      items.push_back({p, *truth});
    } else {
      offenders += (offenders.empty() ? "" : ", ") + p.filename().string();
    }
  }
  if (!offenders.empty()) {
    throw Error(ErrorCode::invalid_argument, "file names are not plate numbers: " + offenders);
  }
  return items;
}

int levenshtein(std::string_view a, std::string_view b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

EvalRecord score(const DatasetItem& item, const RecognitionResult& result) {
  EvalRecord rec{item.image_path.filename().string(), item.truth, result.plate, result.failure_stage};
  const std::string& truth = item.truth.str();
  rec.char_total = static_cast<int>(truth.size());
  rec.elapsed_s = result.timing_s;
  rec.attempts = result.attempts;
  if (!result.plate) return rec;
  const std::string& pred = result.plate->str();
  rec.exact_match = pred == truth;
  if (pred.size() == truth.size()) {
    for (std::size_t i = 0; i < truth.size(); ++i) rec.char_correct += pred[i] == truth[i] ? 1 : 0;
  } else {
    rec.char_correct = std::max(0, rec.char_total - levenshtein(pred, truth));
  }
  return rec;
}

double BenchSummary::exact_match_rate() const {
  if (n_images == 0) return 0.0;
  return 100.0 * static_cast<double>(exact_count) / static_cast<double>(n_images);
}

BenchSummary BenchSummary::from_counts(std::string model, std::optional<RoiVariant> variant, std::size_t n,
                                       std::size_t exact, double mean_time_s) {
  BenchSummary s;
  s.model = std::move(model);
  s.variant = variant;
  s.n_images = n;
  s.exact_count = exact;
  s.mean_time_s = mean_time_s;
  s.timed_runs = n;
  s.mean_attempts = 1.0;
  return s;
}

namespace {

BenchSummary run_one(std::span<const DatasetItem> items, const Recognizer& rec, const BenchOptions& options,
                     std::vector<EvalRecord>& records) {
  BenchSummary s;
  s.model = rec.model_label();
  s.variant = rec.variant();
  s.n_images = items.size();
  std::vector<std::optional<EvalRecord>> slots(items.size());

  if (options.parallel) {
    std::atomic<std::size_t> next{0};
    const unsigned workers = std::max(1U, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                             static_cast<unsigned>(items.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
          slots[i] = score(items[i], rec.recognize(RecognitionInput::from_file(items[i].image_path)));
        }
      });
    }
    for (auto& t : pool) t.join();
  } else {
    double time_sum = 0.0;
    for (int r = 0; r < std::max(1, options.repeats); ++r) {
      for (std::size_t i = 0; i < items.size(); ++i) {
        auto ev = score(items[i], rec.recognize(RecognitionInput::from_file(items[i].image_path)));
        time_sum += ev.elapsed_s;
        ++s.timed_runs;
        if (r == 0) slots[i] = std::move(ev);
      }
    }
    s.mean_time_s = s.timed_runs ? time_sum / static_cast<double>(s.timed_runs) : 0.0;
  }
  records.clear();
  for (auto& slot : slots) records.push_back(std::move(*slot));

  double char_ratio_sum = 0.0, attempts_sum = 0.0;
  for (const auto& ev : records) {
    s.exact_count += ev.exact_match ? 1 : 0;
    char_ratio_sum += ev.char_total ? static_cast<double>(ev.char_correct) / ev.char_total : 0.0;
    attempts_sum += ev.attempts;
  }
  if (!records.empty()) {
    s.mean_char_accuracy = 100.0 * char_ratio_sum / static_cast<double>(records.size());
    s.mean_attempts = attempts_sum / static_cast<double>(records.size());
  }
  return s;
}

}  // namespace

std::vector<BenchSummary> run_bench(std::span<const DatasetItem> items, std::span<const BenchConfig> configs,
                                    const BenchOptions& options, std::vector<std::vector<EvalRecord>>* records) {
  std::vector<BenchSummary> out;
  if (records) records->assign(configs.size(), {});
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::unique_ptr<Recognizer> rec;
    try {
      rec = configs[c].make();
    } catch (const std::exception& e) {
      BenchSummary s;
      s.model = configs[c].label;
      s.n_images = items.size();
      s.aborted = true;
      s.diagnostic = e.what();
      out.push_back(std::move(s));
      continue;
    }
    std::vector<EvalRecord> recs;
    out.push_back(run_one(items, *rec, options, recs));
    if (records) (*records)[c] = std::move(recs);
  }
  return out;
}

std::vector<BenchConfig> configs_from(std::span<const PipelineConfig> pipelines, const lmm::LmmConfig& lmm_cfg) {
  std::vector<BenchConfig> out;
  for (const auto& p : pipelines) {
    out.push_back({p.summary(), [p, lmm_cfg] { return make_recognizer(p, lmm_cfg); }});
  }
  return out;
}

std::optional<TableFormat> parse_table_format(std::string_view text) {
  if (text == "markdown" || text == "md") return TableFormat::markdown;
  if (text == "csv") return TableFormat::csv;
  return std::nullopt;
}

std::string format_percent(double value) {
  char buf[32];
  if (std::abs(value - std::round(value)) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%.0f", std::round(value));
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", value);
  }
  return buf;
}

namespace {

std::string format_time(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", seconds);
  return buf;
}

std::string variant_title(const std::optional<RoiVariant>& v) {
  return v ? std::string(to_string(*v)) : std::string("original_image");
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows,
                   TableFormat format) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (format == TableFormat::csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
    } else {
      out += "|";
      for (const auto& c : cells) out += " " + c + " |";
    }
    out += "\n";
  };
  line(header);
  if (format == TableFormat::markdown) {
    out += "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
    out += "\n";
  }
  for (const auto& r : rows) line(r);
  return out;
}

}  // namespace

std::string emit_table(std::span<const BenchSummary> summaries, TableFormat format, const EmitOptions& options) {
  // Row order follows the first appearance of each model.
  std::vector<std::string> models;
  std::map<std::string, std::vector<const BenchSummary*>> by_model;
  for (const auto& s : summaries) {
    if (!by_model.count(s.model)) models.push_back(s.model);
    by_model[s.model].push_back(&s);
  }

  const std::vector<std::string> header = {
      "Models",
      "Average recognition accuracy (%) of original image",
      "Average recognition accuracy (%) of original image (ROI image)",
      "Average recognition accuracy (%) of gray image (ROI image)",
      "Average recognition accuracy (%) of binary image (ROI image)",
      "Average recognition time (sec.)",
  };
  std::vector<std::vector<std::string>> rows;
  for (const auto& model : models) {
    const auto& group = by_model[model];
    const bool full_image = std::any_of(group.begin(), group.end(), [](auto* s) { return !s->variant; });
    auto cell_for = [&](std::optional<RoiVariant> v) -> std::string {
      if (full_image != !v.has_value()) return "X";
      for (const auto* s : group) {
        if (s->variant == v) return s->aborted ? "ERR" : format_percent(s->exact_match_rate());
      }
      return "-";
    };
    double time_sum = 0.0;
    std::size_t timed = 0;
    for (const auto* s : group) {
      if (s->aborted || !s->mean_time_s) continue;
      time_sum += *s->mean_time_s * static_cast<double>(s->timed_runs);
      timed += s->timed_runs;
    }
    const std::string time_cell = (!options.timing || timed == 0) ? "-" : format_time(time_sum / static_cast<double>(timed));
    rows.push_back({model, cell_for(std::nullopt), cell_for(RoiVariant::original), cell_for(RoiVariant::gray),
                    cell_for(RoiVariant::binary), time_cell});
  }

  const std::vector<std::string> detail_header = {"Configuration",     "Images",           "Exact match (%)",
                                                  "Char accuracy (%)", "Mean time (sec.)", "Mean attempts"};
  std::vector<std::vector<std::string>> detail;
  std::string diagnostics;
  for (const auto& s : summaries) {
    const std::string label = s.model + " / " + variant_title(s.variant);
    if (s.aborted) {
      detail.push_back({label, std::to_string(s.n_images), "ERR", "ERR", "ERR", "ERR"});
      diagnostics += "- aborted: " + label + ": " + s.diagnostic + "\n";
      continue;
    }
    char attempts[32];
    std::snprintf(attempts, sizeof attempts, "%.2f", s.mean_attempts);
    detail.push_back({label, std::to_string(s.n_images), format_percent(s.exact_match_rate()),
                      format_percent(s.mean_char_accuracy),
                      (options.timing && s.mean_time_s) ? format_time(*s.mean_time_s) : "-", attempts});
  }

  std::string out = render(header, rows, format);
  out += "\n";
  out += render(detail_header, detail, format);
  if (format == TableFormat::markdown && !diagnostics.empty()) out += "\n" + diagnostics;
  return out;
}

nlohmann::json to_json(const BenchSummary& s) {
  nlohmann::json j = {{"model", s.model},
                      {"variant", s.variant ? nlohmann::json(std::string(to_string(*s.variant))) : nlohmann::json(nullptr)},
                      {"n_images", s.n_images},
                      {"exact_count", s.exact_count},
                      {"exact_match_rate", s.exact_match_rate()},
                      {"mean_char_accuracy", s.mean_char_accuracy},
                      {"mean_time_s", s.mean_time_s ? nlohmann::json(*s.mean_time_s) : nlohmann::json(nullptr)},
                      {"timed_runs", s.timed_runs},
                      {"mean_attempts", s.mean_attempts},
                      {"aborted", s.aborted}};
  if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  return j;
}

}  // namespace lotwatch::bench
