#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

#include <sys/wait.h>

#include "support.hpp"

namespace {

struct Outcome {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + LOTWATCH_CLI_PATH + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Outcome out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out.output += buf.data();
  const int status = ::pclose(pipe);
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("help and usage errors") {
  auto r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("recognize") != std::string::npos);
  CHECK(run_cli("--version").exit_code == 0);
  CHECK(run_cli("--no-such-flag").exit_code == 2);
  CHECK(run_cli("recognize").exit_code == 2);
  CHECK(run_cli("recognize x.png --backend quantum").exit_code == 2);
  CHECK(run_cli("synth --plate ABC123").exit_code == 2);
}

TEST_CASE("synth then recognize") {
  testsupport::TempDir dir;
  const auto png = dir / "plate.png";
  auto r = run_cli("synth --plate TPE2024 --out " + q(png));
  REQUIRE(r.exit_code == 0);
  CHECK(std::filesystem::exists(png));
  CHECK(std::filesystem::exists(dir / "plate.box"));

  r = run_cli("recognize " + q(png));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("plate: TPE2024") != std::string::npos);
  CHECK(r.output.find("time: ") != std::string::npos);

  r = run_cli("recognize --json --variant gray " + q(png));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"plate\": \"TPE2024\"") != std::string::npos);

  r = run_cli("synth --plate 'NOT A PLATE' --out " + q(dir / "bad.png"));
  CHECK(r.exit_code == 1);
}

TEST_CASE("recognize failures exit with 1") {
  testsupport::TempDir dir;
  testsupport::spit(dir / "note.png", "plain text");
  auto r = run_cli("recognize " + q(dir / "note.png"));
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("decode") != std::string::npos);
  CHECK(run_cli("recognize " + q(dir / "absent.png")).exit_code == 1);
}

TEST_CASE("bench") {
  testsupport::TempDir dir;
  for (const char* p : {"HPJ149", "ZNF416"}) REQUIRE(run_cli("synth --plate " + std::string(p) + " --out " + q(dir / (std::string(p) + ".png"))).exit_code == 0);
  auto r = run_cli("bench --dataset " + q(dir.path()) + " --detector oracle,heuristic --variant binary --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("oracle + baseline") != std::string::npos);
  CHECK(r.output.find("heuristic + baseline") != std::string::npos);

  testsupport::TempDir empty;
  CHECK(run_cli("bench --dataset " + q(empty.path())).exit_code == 1);
}

TEST_CASE("patrol writes its report") {
  testsupport::TempDir dir;
  auto doc = testsupport::slurp(testsupport::data_dir() / "scenario_seed42.json");
  const auto reg = (testsupport::data_dir() / "registry.csv").string();
  const auto at = doc.find("\"registry.csv\"");
  REQUIRE(at != std::string::npos);
  doc.replace(at, std::string("\"registry.csv\"").size(), "\"" + reg + "\"");
  testsupport::spit(dir / "scenario.json", doc);
  auto r = run_cli("patrol --scenario " + q(dir / "scenario.json") + " --out " + q(dir / "report.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("illegal: 3") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "report.json"));
}
