// lotwatch command line: recognize, bench, patrol, synth, serve.
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "lotwatch/lotwatch.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CString {
  char* p = nullptr;
  ~CString() { lw_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct ContextDeleter {
  void operator()(lw_context* c) const { lw_context_free(c); }
};
using ContextPtr = std::unique_ptr<lw_context, ContextDeleter>;

struct ServerDeleter {
  void operator()(lw_server* s) const { lw_server_free(s); }
};
using ServerPtr = std::unique_ptr<lw_server, ServerDeleter>;

int fail(const std::string& what, lw_status st) {
  std::cerr << "lotwatch: " << what << ": " << lw_last_error() << " (" << lw_status_string(st) << ")\n";
  return kExitFailure;
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

ContextPtr open_context(const std::string& config_path, int& rc) {
  lw_context* ctx = nullptr;
  const lw_status st = lw_context_create(config_path.empty() ? nullptr : config_path.c_str(), &ctx);
  if (st != LW_OK) {
    rc = fail("cannot load config", st);
    return nullptr;
  }
  return ContextPtr(ctx);
}

struct Selectors {
  std::vector<std::string> backends{"dual"};
  std::vector<std::string> detectors{"heuristic"};
  std::vector<std::string> ocrs{"baseline"};
  std::vector<std::string> variants{"binary"};
  bool from_config = true;  // no selector flag given
};

void add_selector_flags(CLI::App* cmd, Selectors& sel, bool multi) {
  const char* suffix = multi ? " (comma-separated list allowed)" : "";
  auto* b = cmd->add_option("--backend", sel.backends, std::string("dual or lmm") + suffix)
                ->check(CLI::IsMember({"dual", "lmm"}));
  auto* d = cmd->add_option("--detector", sel.detectors, std::string("oracle, heuristic or external") + suffix)
                ->check(CLI::IsMember({"oracle", "heuristic", "external"}));
  auto* o = cmd->add_option("--ocr", sel.ocrs, std::string("baseline or external") + suffix)
                ->check(CLI::IsMember({"baseline", "external"}));
  auto* v = cmd->add_option("--variant", sel.variants, std::string("original, gray, binary or all") + suffix)
                ->check(CLI::IsMember({"original", "gray", "binary", "all"}));
  for (auto* opt : {b, d, o, v}) {
    if (multi) {
      opt->delimiter(',');
    } else {
      opt->expected(1);
    }
  }
}

bool any_selector_given(CLI::App* cmd) {
  for (const char* name : {"--backend", "--detector", "--ocr", "--variant"}) {
    if (cmd->count(name) > 0) return true;
  }
  return false;
}

// Cross product of the selectors; the lmm backend contributes one entry.
json pipelines_from(const Selectors& sel) {
  std::vector<std::string> variants;
  for (const auto& v : sel.variants) {
    if (v == "all") {
      variants.insert(variants.end(), {"original", "gray", "binary"});
    } else {
      variants.push_back(v);
    }
  }
  json out = json::array();
  for (const auto& backend : sel.backends) {
    if (backend == "lmm") {
      out.push_back({{"backend", "lmm"}});
      continue;
    }
    for (const auto& det : sel.detectors) {
      for (const auto& ocr : sel.ocrs) {
        for (const auto& v : variants) {
          out.push_back({{"backend", "dual"}, {"detector", det}, {"ocr", ocr}, {"variant", v}});
        }
      }
    }
  }
  return out;
}

int run_recognize(const std::string& config_path, const std::string& file, CLI::App* cmd, const Selectors& sel,
                  bool as_json) {
  int rc = kExitOk;
  auto ctx = open_context(config_path, rc);
  if (!ctx) return rc;
  std::string pipeline;
  if (any_selector_given(cmd)) pipeline = pipelines_from(sel).at(0).dump();
  CString out;
  const lw_status st = lw_recognize_file(ctx.get(), file.c_str(), pipeline.empty() ? nullptr : pipeline.c_str(), &out.p);
  if (st != LW_OK) return fail("recognition failed", st);
  const json result = json::parse(out.str());
  if (as_json) {
    std::cout << result.dump(2) << "\n";
  } else if (!result.at("plate").is_null()) {
    std::printf("plate: %s\ntime: %.4f s\nbackend: %s\n", result.at("plate").get<std::string>().c_str(),
                result.at("timing_s").get<double>(), result.at("backend").get<std::string>().c_str());
  }
  if (result.at("plate").is_null()) {
    const auto& f = result.at("failure");
    std::cerr << "lotwatch: no plate read (" << f.at("stage").get<std::string>()
              << "): " << f.at("detail").get<std::string>() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string dataset;
  Selectors sel;
  int repeats = 0;
  std::string out;
  std::string format;
  std::string summary_json;
  bool parallel = false;
};

int run_bench(const std::string& config_path, const BenchArgs& a, CLI::App* cmd) {
  int rc = kExitOk;
  auto ctx = open_context(config_path, rc);
  if (!ctx) return rc;
  json opts = json::object();
  if (any_selector_given(cmd)) opts["pipelines"] = pipelines_from(a.sel);
  if (a.repeats > 0) opts["repeats"] = a.repeats;
  if (!a.format.empty()) opts["format"] = a.format;
  opts["parallel"] = a.parallel;
  const std::string opts_text = opts.dump();

  CString table, summary;
  const lw_status st = lw_bench_run(ctx.get(), a.dataset.c_str(), opts_text.c_str(), &table.p, &summary.p);
  if (st != LW_OK) return fail("bench failed", st);

  if (a.out.empty()) {
    std::cout << table.str();
  } else if (!write_text(a.out, table.str())) {
    std::cerr << "lotwatch: cannot write " << a.out << "\n";
    return kExitFailure;
  }
  if (!a.summary_json.empty() && !write_text(a.summary_json, summary.str() + "\n")) {
    std::cerr << "lotwatch: cannot write " << a.summary_json << "\n";
    return kExitFailure;
  }
  bool aborted = false;
  for (const auto& s : json::parse(summary.str())) {
    if (s.at("aborted").get<bool>()) {
      aborted = true;
      std::cerr << "lotwatch: " << s.at("model").get<std::string>() << " aborted: " << s.value("diagnostic", "")
                << "\n";
    }
  }
  return aborted ? kExitFailure : kExitOk;
}

int run_patrol(const std::string& config_path, const std::string& scenario, const std::string& out) {
  int rc = kExitOk;
  auto ctx = open_context(config_path, rc);
  if (!ctx) return rc;
  CString report;
  const lw_status st = lw_patrol_run(ctx.get(), scenario.c_str(), &report.p);
  if (st != LW_OK) return fail("patrol failed", st);
  if (!out.empty() && !write_text(out, report.str() + "\n")) {
    std::cerr << "lotwatch: cannot write " << out << "\n";
    return kExitFailure;
  }
  const json doc = json::parse(report.str());
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    const auto& c = doc;
    std::printf("legal: %d  illegal: %d  unreadable: %d  empty: %d\n", c.at("legal").get<int>(),
                c.at("illegal").get<int>(), c.at("unreadable").get<int>(), c.at("empty").get<int>());
  }
  for (const auto& d : doc.at("deliveries")) {
    if (d.at("status").get<std::string>() != "delivered") {
      std::cerr << "lotwatch: notification for event " << d.at("event_seq").get<std::uint64_t>() << " "
                << d.at("status").get<std::string>() << "\n";
    }
  }
  return kExitOk;
}

struct SynthArgs {
  std::string plate;
  std::string out;
  int cell_size = 3;
  int margin = 20;
  double noise = 0.0;
  double rotation = 0.0;
  int blur = 0;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  const json opts = {{"cell_size", a.cell_size}, {"margin", a.margin},  {"noise_sigma", a.noise},
                     {"rotation_deg", a.rotation}, {"blur_radius", a.blur}, {"seed", a.seed}};
  const std::string text = opts.dump();
  CString info;
  const lw_status st = lw_synth_plate(a.plate.c_str(), text.c_str(), a.out.c_str(), &info.p);
  if (st != LW_OK) return fail("synth failed", st);
  const json doc = json::parse(info.str());
  const auto& b = doc.at("box");
  std::printf("%s -> %s (box %d,%d %dx%d)\n", doc.at("plate").get<std::string>().c_str(), a.out.c_str(),
              b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>());
  return kExitOk;
}

int run_serve(const std::string& config_path, const std::string& host, int port) {
  int rc = kExitOk;
  auto ctx = open_context(config_path, rc);
  if (!ctx) return rc;

  // Route SIGINT/SIGTERM to a waiter thread so shutdown goes through the API.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  lw_server* raw = nullptr;
  lw_status st = lw_server_create(ctx.get(), &raw);
  if (st != LW_OK) return fail("cannot create server", st);
  ServerPtr srv(raw);
  if ((st = lw_server_load_registry(srv.get())) != LW_OK) return fail("cannot load registry", st);

  CString cfg;
  lw_context_config_json(ctx.get(), &cfg.p);
  const json effective = json::parse(cfg.str());
  const std::string bind_host = host.empty() ? effective.at("server").at("host").get<std::string>() : host;
  const int bind_port = port >= 0 ? port : effective.at("server").at("port").get<int>();
  int bound = 0;
  if ((st = lw_server_bind(srv.get(), bind_host.c_str(), bind_port, &bound)) != LW_OK) return fail("cannot bind", st);
  std::printf("listening on http://%s:%d\n", bind_host.c_str(), bound);
  std::fflush(stdout);

  std::thread waiter([&signals, s = srv.get()] {
    int sig = 0;
    sigwait(&signals, &sig);
    lw_server_stop(s);
  });
  st = lw_server_listen(srv.get());
  // listen can also return on its own (socket error); wake the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (st != LW_OK) return fail("server stopped", st);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lotwatch: parking patrol plate recognition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lw_version()));
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file (defaults apply when omitted)")
      ->check(CLI::ExistingFile);

  auto* recognize = app.add_subcommand("recognize", "Read the plate in one image");
  std::string rec_file;
  bool rec_json = false;
  Selectors rec_sel;
  recognize->add_option("FILE", rec_file, "PNG or JPEG image")->required();
  add_selector_flags(recognize, rec_sel, false);
  recognize->add_flag("--json", rec_json, "Print the full result document");

  auto* bench = app.add_subcommand("bench", "Score backends on a directory of images named by plate");
  BenchArgs bench_args;
  bench->add_option("--dataset", bench_args.dataset, "Directory of <PLATE>.png/.jpg images")->required();
  add_selector_flags(bench, bench_args.sel, true);
  bench->add_option("--repeats", bench_args.repeats, "Timed passes over the dataset")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_args.out, "Write the tables here instead of stdout");
  bench->add_option("--format", bench_args.format, "markdown or csv")->check(CLI::IsMember({"markdown", "csv"}));
  bench->add_option("--summary-json", bench_args.summary_json, "Also write per-configuration summaries as JSON");
  bench->add_flag("--parallel", bench_args.parallel, "Accuracy only, across threads (no timing)");

  auto* patrol = app.add_subcommand("patrol", "Run a simulated patrol scenario");
  std::string scenario, patrol_out;
  patrol->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  patrol->add_option("--out", patrol_out, "Write the report JSON here and print counts only");

  auto* synth = app.add_subcommand("synth", "Render a synthetic plate image with its box sidecar");
  SynthArgs synth_args;
  synth->add_option("--plate", synth_args.plate, "Plate text, 6-7 characters A-Z 0-9")->required();
  synth->add_option("--out", synth_args.out, "Output PNG path")->required();
  synth->add_option("--cell-size", synth_args.cell_size, "Pixels per glyph cell")->check(CLI::Range(1, 16));
  synth->add_option("--margin", synth_args.margin, "White border in pixels")->check(CLI::Range(0, 1000));
  synth->add_option("--noise", synth_args.noise, "Gaussian noise sigma in gray levels");
  synth->add_option("--rotation", synth_args.rotation, "Rotation in degrees, within [-10, 10]");
  synth->add_option("--blur", synth_args.blur, "Box blur radius in pixels");
  synth->add_option("--seed", synth_args.seed, "Noise seed");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string serve_host;
  int serve_port = -1;
  serve->add_option("--host", serve_host, "Override the configured host");
  serve->add_option("--port", serve_port, "Override the configured port (0 picks a free one)")
      ->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*recognize) return run_recognize(config_path, rec_file, recognize, rec_sel, rec_json);
    if (*bench) return run_bench(config_path, bench_args, bench);
    if (*patrol) return run_patrol(config_path, scenario, patrol_out);
    if (*synth) return run_synth(synth_args);
    if (*serve) return run_serve(config_path, serve_host, serve_port);
  } catch (const std::exception& e) {
    std::cerr << "lotwatch: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
