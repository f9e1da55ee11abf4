#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "common/error.hpp"
#include "detection/detection.hpp"
#include "imaging/codec.hpp"
#include "support.hpp"
#include "synth/plate_synth.hpp"

using namespace lotwatch;
using namespace lotwatch::detection;

namespace {

synth::RenderedPlate scene(const char* text, int x, int y) {
  const auto r = synth::render_plate(*PlateString::from_normalized(text), synth::GlyphAtlas{}, 0);
  return synth::compose_scene(r, 480, 240, x, y);
}

}  // namespace

TEST_SUITE("detection") {

TEST_CASE("iou") {
  const DetectionBox a{0, 0, 10, 10, 1};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, {5, 0, 10, 10, 1}) == doctest::Approx(50.0 / 150.0));
  CHECK(iou(a, {20, 20, 5, 5, 1}) == 0.0);
  CHECK(iou(a, {2, 2, 4, 4, 1}) == doctest::Approx(16.0 / 100.0));
  CHECK(iou(a, {0, 0, 0, 5, 1}) == 0.0);
}

TEST_CASE("kind names") {
  CHECK(parse_detector_kind("heuristic") == DetectorKind::heuristic);
  CHECK(parse_detector_kind("oracle") == DetectorKind::oracle);
  CHECK(parse_detector_kind("external") == DetectorKind::external);
  CHECK_FALSE(parse_detector_kind("yolo").has_value());
  CHECK(to_string(DetectorKind::heuristic) == "heuristic");
}

TEST_CASE("sidecar round trip and oracle detector") {
  testsupport::TempDir dir;
  const auto img = dir / "HPJ149.png";
  CHECK(sidecar_path(img) == dir / "HPJ149.box");
  write_sidecar(img, {12, 34, 56, 78, 0.5});
  const auto box = read_sidecar(img);
  CHECK(box.x == 12);
  CHECK(box.h == 78);

  OracleDetector det;
  const Image blank = Image::filled(200, 200, 1, 255);
  DetectContext ctx;
  ctx.source = img;
  const auto found = det.detect(blank, ctx);
  CHECK(found.w == 56);
  CHECK(found.confidence == 1.0);

  ctx.annotation = DetectionBox{1, 2, 3, 4, 0.2};
  CHECK(det.detect(blank, ctx).x == 1);

  try {
    (void)read_sidecar(dir / "other.png");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
    CHECK(std::string(e.what()).find("other.box") != std::string::npos);
  }
  testsupport::spit(dir / "bad.box", "1 2 three 4\n");
  CHECK_THROWS_AS(read_sidecar(dir / "bad.png"), Error);
  CHECK_THROWS_AS(det.detect(blank, DetectContext{}), Error);
}

TEST_CASE("heuristic box covers a clean plate tightly") {
  for (auto [x, y] : {std::pair{10, 10}, {100, 80}, {170, 150}}) {
    const auto s = scene("HPJ149", x, y);
    const auto box = detect_heuristic(s.image);
    CHECK(iou(box, s.box) >= 0.9236);
    CHECK(box.x <= s.box.x);
    CHECK(box.y <= s.box.y);
    CHECK(box.x + box.w >= s.box.x + s.box.w);
    CHECK(box.confidence == doctest::Approx(1.0));
  }
}

TEST_CASE("heuristic ignores sparse specks") {
  auto s = scene("ABC1234", 60, 100);
  Image img = s.image;
  for (int c = 0; c < 3; ++c) img.at(2, 2, c) = 0;
  const auto box = detect_heuristic(img);
  CHECK(iou(box, s.box) >= 0.9);
  CHECK(box.confidence < 1.0);
}

TEST_CASE("uniform images have no plate") {
  for (std::uint8_t v : {0, 128, 255}) {
    try {
      (void)detect_heuristic(Image::filled(50, 40, 1, v));
      FAIL("expected unreadable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::unreadable);
    }
  }
}

TEST_CASE("external detector adapter") {
  httplib::Server server;
  int requests = 0;
  server.Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const auto img = imaging::decode_image(
        std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()));
    res.set_content(R"({"x":3,"y":4,"w":)" + std::to_string(img.width() / 2) + R"(,"h":9,"confidence":0.75})",
                    "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  ExternalDetector det(base + "/detect", 5.0);
  const auto box = det.detect(Image::filled(40, 20, 3, 255), {});
  CHECK(box.x == 3);
  CHECK(box.w == 20);
  CHECK(box.confidence == doctest::Approx(0.75));
  CHECK(requests == 1);

  ExternalDetector broken(base + "/broken", 5.0);
  try {
    (void)broken.detect(Image::filled(40, 20, 3, 255), {});
    FAIL("expected upstream error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::upstream);
  }
  server.stop();
  t.join();
}

}
