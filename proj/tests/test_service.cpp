#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "ivos/client.hpp"
#include "ivos/config.hpp"
#include "ivos/dataset.hpp"
#include "ivos/http_server.hpp"
#include "ivos/image_io.hpp"
#include "ivos/mask_ops.hpp"
#include "ivos/scribble_io.hpp"
#include "ivos/service.hpp"
#include "ivos/synth.hpp"
#include "ivos/wire.hpp"
#include "httplib.h"

using namespace ivos;
using namespace ivos::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ivos::Error");
  return ErrorCode::invalid_argument;
}

std::set<std::string> keys_of(const json& j) {
  std::set<std::string> k;
  for (const auto& [key, _] : j.items()) k.insert(key);
  return k;
}

struct Fixture {
  fs::path root;
  std::shared_ptr<const DatasetRepository> repo;

  explicit Fixture(const std::string& name) : root(synth_fixture(name)) {
    repo = std::make_shared<const DatasetRepository>(load_manifest(root));
  }

  ServiceConfig config(const std::string& logs) const {
    ServiceConfig c;
    c.dataset = root;
    c.log_dir = fresh_dir(logs);
    return c;
  }

  json gt_body(const std::string& seq) const {
    const auto gt = repo->ground_truth(seq);
    return encode_prediction(*gt, repo->manifest().sequence(seq).objects);
  }

  json blank_body(const std::string& seq) const {
    const auto& info = repo->manifest().sequence(seq);
    const std::vector<LabelMask> blank(static_cast<std::size_t>(info.frames), LabelMask(info.size));
    return encode_prediction(blank, info.objects);
  }
};

// Independent re-simulation of one square by stepping its velocity and
// flipping at the walls.
Pixel stepped_position(const SquareTrack& tr, Motion motion, RasterSize size, int t) {
  int x = tr.x0, y = tr.y0, vx = tr.vx, vy = tr.vy;
  const int rx = size.width - tr.side, ry = tr.band_height - tr.side;
  for (int s = 0; s < t; ++s) {
    if (motion == Motion::linear) {
      x += vx;
      y += vy;
      continue;
    }
    for (int k = 0; k < std::abs(vx); ++k) {
      if (x + (vx > 0 ? 1 : -1) < 0 || x + (vx > 0 ? 1 : -1) > rx) vx = -vx;
      if (rx > 0) x += vx > 0 ? 1 : -1;
    }
    for (int k = 0; k < std::abs(vy); ++k) {
      if (y + (vy > 0 ? 1 : -1) < 0 || y + (vy > 0 ? 1 : -1) > ry) vy = -vy;
      if (ry > 0) y += vy > 0 ? 1 : -1;
    }
  }
  return {x, tr.band_top + y};
}

}  // namespace

TEST_CASE("config file and environment") {
  const auto kv = parse_key_values("# comment\n\nport = 9001\nthreshold=0.7\ntokens = a, b\n", "svc.conf");
  CHECK(kv.at("port") == "9001");
  ServiceConfig c;
  c.dataset = "/data";
  apply_config(c, kv);
  CHECK(c.port == 9001);
  CHECK(c.tracks.threshold == 0.7);
  CHECK(c.tokens == std::vector<std::string>{"a", "b"});

  try {
    parse_key_values("port = 1\nbogus = 2\n", "svc.conf");
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("svc.conf:2") != std::string::npos);
  }
  CHECK(code_of([] { parse_key_values("just words\n"); }) == ErrorCode::format);
  CHECK(code_of([&] { apply_config(c, {{"port", "eighty"}}); }) == ErrorCode::format);

  const auto file = fresh_dir("config") / "svc.conf";
  write_bytes(file, "dataset = /data\nport = 9001\nbudget_rate_s = 4\n");
  ::setenv("IVOS_PORT", "9100", 1);
  const ServiceConfig loaded = load_service_config(file);
  ::unsetenv("IVOS_PORT");
  CHECK(loaded.port == 9100);
  CHECK(loaded.tracks.budget_rate_s == 4.0);
  CHECK(loaded.dataset == fs::path("/data"));
}

TEST_CASE("synth dataset layout and determinism") {
  const SynthSpec spec;  // 2 sequences, 10 frames, 64x64, 2 objects, seed 7
  const auto a = synth_fixture("synth_a", spec);
  const auto b = synth_fixture("synth_b", spec);
  int images = 0, masks = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() == ".jpg") ++images;
    if (e.path().extension() == ".png") ++masks;
  }
  CHECK(images == 20);
  CHECK(masks == 20);
  CHECK(read_bytes(a / "Splits" / "val.txt") == "synth000\nsynth001\n");

  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    REQUIRE(fs::exists(b / rel));
    CHECK(read_bytes(e.path()) == read_bytes(b / rel));
  }

  const auto m = load_manifest(a);
  CHECK(m.split("val").size() == 2);
  CHECK(m.sequence("synth001").frames == 10);
  CHECK(m.sequence("synth001").objects == std::vector<ObjectId>{1, 2});
}

TEST_CASE("synth object areas follow the motion model") {
  for (const Motion motion : {Motion::bounce, Motion::linear}) {
    for (std::uint64_t seed : {1u, 7u, 99u}) {
      SynthSpec spec;
      spec.motion = motion;
      spec.seed = seed;
      spec.objects = 3;
      spec.frames = 25;
      spec.size = {80, 72};
      const auto tracks = synth_tracks(spec);
      for (const auto& seq : tracks) {
        for (int t = 0; t < spec.frames; ++t) {
          const LabelMask labels = synth_labels(spec, seq, t);
          for (std::size_t k = 0; k < seq.size(); ++k) {
            const SquareTrack& tr = seq[k];
            const Pixel p = stepped_position(tr, motion, spec.size, t);
            REQUIRE(p.x >= 0);
            REQUIRE(p.x + tr.side <= spec.size.width);
            REQUIRE(p.y >= tr.band_top);
            REQUIRE(p.y + tr.side <= tr.band_top + tr.band_height);
            std::size_t inside = 0, total = 0;
            for (int y = 0; y < spec.size.height; ++y)
              for (int x = 0; x < spec.size.width; ++x) {
                if (labels.at(x, y) != static_cast<ObjectId>(k + 1)) continue;
                ++total;
                if (x >= p.x && x < p.x + tr.side && y >= p.y && y < p.y + tr.side) ++inside;
              }
            CHECK(total == static_cast<std::size_t>(tr.side * tr.side));
            CHECK(inside == total);
          }
        }
      }
    }
  }
}

TEST_CASE("manifest errors name the sequence") {
  const auto root = synth_fixture("manifest_missing");
  fs::remove_all(root / "Annotations" / "synth001");
  try {
    load_manifest(root);
    FAIL("missing annotations accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("synth001") != std::string::npos);
  }

  const auto root2 = synth_fixture("manifest_count");
  fs::remove(annotation_path(root2, "synth000", 9));
  try {
    load_manifest(root2);
    FAIL("count mismatch accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("synth000") != std::string::npos);
  }

  CHECK(code_of([] { load_manifest("/nonexistent/ivos/root"); }) == ErrorCode::io);
  const auto root3 = synth_fixture("manifest_nosplit");
  fs::remove_all(root3 / "Splits");
  CHECK(code_of([&] { load_manifest(root3); }) == ErrorCode::io);
}

TEST_CASE("start") {
  Fixture fx("svc_start");
  auto cfg = fx.config("svc_start_logs");
  cfg.tokens = {"alice", "bob"};
  EvaluationService svc(cfg, fx.repo);

  CHECK(code_of([&] { svc.start("mallory", {{"sequence", "synth000"}}); }) == ErrorCode::auth);
  CHECK(code_of([&] { svc.start("", {{"sequence", "synth000"}}); }) == ErrorCode::auth);
  CHECK(svc.health()["sessions"] == 0);  // no session created
  CHECK(code_of([&] { svc.start("alice", {{"sequence", "nope"}}); }) == ErrorCode::not_found);
  CHECK(code_of([&] { svc.start("alice", json::array()); }) == ErrorCode::format);

  const json r = svc.start("alice", {{"sequence", "synth000"}});
  CHECK(keys_of(r) == std::set<std::string>{"session_id", "sequence", "frames", "width", "height", "objects", "scribbles"});
  CHECK(r["frames"] == 10);
  CHECK(r["width"] == 64);
  CHECK(r["objects"] == json::array({1, 2}));
  const ScribbleSet s = scribbles_from_json(r["scribbles"], ScribbleKind::simulated);
  CHECK(s.scribbles.size() == 2);  // bootstrap: one per object
  CHECK(s.frames().size() == 1);
}

TEST_CASE("start uses the human scribble pool when present") {
  Fixture fx("svc_pool");
  ScribbleSet human;
  human.sequence = "synth000";
  Scribble sc;
  sc.frame = 3;
  sc.object_label = 1;
  sc.kind = ScribbleKind::human;
  sc.path = {{0.1, 0.1}, {0.2, 0.15}};
  human.scribbles.push_back(sc);
  sc.object_label = 2;
  sc.path = {{0.3, 0.7}, {0.4, 0.75}};
  human.scribbles.push_back(sc);
  fs::create_directories(fx.root / "Scribbles" / "synth000");
  save_scribble_file(fx.root / "Scribbles" / "synth000" / "001.json", human);
  // The repository reads pools lazily, so the file is visible.
  EvaluationService svc(fx.config("svc_pool_logs"), fx.repo);
  const json r = svc.start("t", {{"sequence", "synth000"}});
  const ScribbleSet got = scribbles_from_json(r["scribbles"], ScribbleKind::human);
  REQUIRE(got.scribbles.size() == 2);
  CHECK(got.scribbles[0].frame == 3);
  CHECK(got.scribbles[0].path == human.scribbles[0].path);
}

TEST_CASE("submit") {
  Fixture fx("svc_submit");
  const auto cfg = fx.config("svc_submit_logs");
  EvaluationService svc(cfg, fx.repo);

  SUBCASE("ground truth closes at turn 1 with 1.0") {
    const std::string id = svc.start("t", {{"sequence", "synth001"}})["session_id"];
    const json r = svc.submit("t", id, fx.gt_body("synth001"));
    REQUIRE(r.contains("report"));
    CHECK(keys_of(r) == std::set<std::string>{"report"});
    CHECK(r["report"]["quality_at_budget"] == 1.0);
    CHECK(r["report"]["interactions"] == 1);
    CHECK(r["report"]["reason"] == "error-free");
    CHECK(code_of([&] { svc.submit("t", id, fx.gt_body("synth001")); }) == ErrorCode::phase);
  }

  SUBCASE("malformed RLE is rejected atomically") {
    const std::string id = svc.start("t", {{"sequence", "synth000"}})["session_id"];
    json bad = fx.blank_body("synth000");
    bad["masks"][0] = json::array({{{"object_id", 1}, {"runs", {5, 7}}}});
    CHECK(code_of([&] { svc.submit("t", id, bad); }) == ErrorCode::format);
    json short_body = fx.blank_body("synth000");
    short_body["masks"].erase(0);
    CHECK(code_of([&] { svc.submit("t", id, short_body); }) == ErrorCode::size_mismatch);
    CHECK(code_of([&] { svc.submit("t", id, json{{"masks", 3}}); }) == ErrorCode::format);
    CHECK(code_of([&] { svc.report("t", id); }) == ErrorCode::phase);

    const json ok = svc.submit("t", id, fx.blank_body("synth000"));
    REQUIRE(ok.contains("scribbles"));
    const ScribbleSet next = scribbles_from_json(ok["scribbles"], ScribbleKind::simulated);
    CHECK(!next.empty());
    CHECK(next.frames().size() == 1);  // one frame per interaction
    // The accepted submission was the first recorded interaction.
    const auto log = read_bytes(cfg.log_dir / (id + ".jsonl"));
    CHECK(log.find("\"index\":1") != std::string::npos);
    CHECK(log.find("\"index\":2") == std::string::npos);
  }

  SUBCASE("mid-session scribbles land on exactly one frame") {
    const std::string id = svc.start("t", {{"sequence", "synth000"}})["session_id"];
    const auto gt = fx.repo->ground_truth("synth000");
    for (int turn = 0; turn < 4; ++turn) {
      // Ground truth with one object dropped on every other frame.
      std::vector<LabelMask> pred = *gt;
      for (std::size_t f = turn % 2; f < pred.size(); f += 2)
        for (auto& v : pred[f].labels)
          if (v == 2) v = 0;
      const json r = svc.submit("t", id, encode_prediction(pred, std::vector<ObjectId>{1, 2}));
      REQUIRE(r.contains("scribbles"));
      const ScribbleSet next = scribbles_from_json(r["scribbles"], ScribbleKind::simulated);
      CHECK(next.frames().size() == 1);
    }
  }

  SUBCASE("isolation") {
    const std::string id = svc.start("alice", {{"sequence", "synth000"}})["session_id"];
    const ErrorCode foreign = code_of([&] { svc.submit("bob", id, fx.gt_body("synth000")); });
    const ErrorCode missing = code_of([&] { svc.submit("bob", "s999", fx.gt_body("synth000")); });
    CHECK(foreign == ErrorCode::not_found);
    CHECK(foreign == missing);
    CHECK(code_of([&] { svc.report("bob", id); }) == ErrorCode::not_found);
    // Alice's session is untouched by the foreign attempt.
    CHECK(svc.submit("alice", id, fx.gt_body("synth000")).contains("report"));
  }

  SUBCASE("repeated reports are the same bytes") {
    const std::string id = svc.start("t", {{"sequence", "synth000"}})["session_id"];
    svc.submit("t", id, fx.gt_body("synth000"));
    const std::string a = svc.report("t", id);
    CHECK(a == svc.report("t", id));
    CHECK(json::parse(a)["quality_at_budget"] == 1.0);
  }
}

TEST_CASE("quota and split start") {
  Fixture fx("svc_quota");
  auto cfg = fx.config("svc_quota_logs");
  cfg.quota = 2;
  EvaluationService svc(cfg, fx.repo);
  CHECK(svc.start("t", {{"split", "val"}})["sequence"] == "synth000");
  CHECK(svc.start("t", {{"split", "val"}})["sequence"] == "synth001");
  CHECK(code_of([&] { svc.start("t", {{"sequence", "synth000"}}); }) == ErrorCode::quota);
  CHECK(svc.start("u", {{"sequence", "synth001"}})["sequence"] == "synth001");
  CHECK(svc.start("u", {{"split", "val"}})["sequence"] == "synth000");
  CHECK(code_of([&] { svc.start("v", {{"split", "nope"}}); }) == ErrorCode::not_found);
}

TEST_CASE("concurrent requests on one session are rejected") {
  Fixture fx("svc_busy");
  std::atomic<bool> armed{false};
  std::atomic<int> busy_seen{0};
  EvaluationService* self = nullptr;
  std::string id;
  json body;
  // The clock runs inside the session turn, so a request issued from it
  // collides with the one in flight.
  const SessionClock clock = [&] {
    if (armed.exchange(false)) {
      std::thread other([&] {
        try {
          self->submit("t", id, body);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::busy) ++busy_seen;
        }
      });
      other.join();
    }
    return 0.0;
  };
  EvaluationService svc(fx.config("svc_busy_logs"), fx.repo, clock);
  self = &svc;
  id = svc.start("t", {{"sequence", "synth000"}})["session_id"];
  body = fx.blank_body("synth000");
  armed = true;
  const json r = svc.submit("t", id, body);
  CHECK(busy_seen == 1);
  CHECK(r.contains("scribbles"));
}

TEST_CASE("restart keeps reports byte-identical") {
  Fixture fx("svc_restart");
  const auto cfg = fx.config("svc_restart_logs");
  std::string closed_id, open_id, bytes;
  {
    EvaluationService svc(cfg, fx.repo);
    closed_id = svc.start("t", {{"sequence", "synth000"}})["session_id"];
    svc.submit("t", closed_id, fx.blank_body("synth000"));
    svc.submit("t", closed_id, fx.gt_body("synth000"));
    bytes = svc.report("t", closed_id);
    open_id = svc.start("t", {{"sequence", "synth001"}})["session_id"];
  }
  EvaluationService again(cfg, fx.repo);
  CHECK(again.report("t", closed_id) == bytes);
  CHECK(code_of([&] { again.report("other", closed_id); }) == ErrorCode::not_found);
  CHECK(code_of([&] { again.submit("t", open_id, fx.gt_body("synth001")); }) == ErrorCode::phase);
  CHECK(again.start("t", {{"sequence", "synth001"}})["session_id"] == "s3");

  // A report file lost before the restart is rebuilt from the log alone.
  fs::remove(cfg.log_dir / (closed_id + ".report.json"));
  EvaluationService third(cfg, fx.repo);
  CHECK(third.report("t", closed_id) == bytes);
}

TEST_CASE("http transport") {
  Fixture fx("svc_http");
  auto cfg = fx.config("svc_http_logs");
  cfg.tokens = {"alice", "bob"};
  EvaluationService svc(cfg, fx.repo);
  std::vector<std::string> lines;
  std::mutex lines_mu;
  HttpServer server(svc, [&](const std::string& l) {
    std::lock_guard lock(lines_mu);
    lines.push_back(l);
  });
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread serving([&] { server.serve(); });
  server.wait_until_ready();

  httplib::Client raw("127.0.0.1", port);
  const auto health = raw.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");
  const auto unauth = raw.Post("/session", R"({"sequence":"synth000"})", "application/json");
  REQUIRE(unauth);
  CHECK(unauth->status == 401);
  CHECK(json::parse(unauth->body)["code"] == "auth");
  const auto bearer = raw.Post("/session", httplib::Headers{{"Authorization", "Bearer bob"}}, "{not json",
                               "application/json");
  REQUIRE(bearer);
  CHECK(bearer->status == 400);
  CHECK(json::parse(bearer->body)["code"] == "format");

  HttpEndpoint alice("127.0.0.1", port, "alice");
  OracleSegmenter oracle([&](const std::string& seq) { return *fx.repo->ground_truth(seq); });
  const LoopResult loop = run_interactive_loop(alice, "synth000", oracle, 8);
  CHECK(loop.closed);
  CHECK(loop.turns == 1);
  CHECK(loop.report["quality_at_budget"] == 1.0);
  CHECK(alice.report(loop.session_id) == loop.report);
  CHECK(alice.report(loop.session_id).dump() + "\n" == svc.report("alice", loop.session_id));

  HttpEndpoint bob("127.0.0.1", port, "bob");
  CHECK(code_of([&] { bob.report(loop.session_id); }) == ErrorCode::not_found);
  const StartResult open = bob.start("synth001");
  CHECK(code_of([&] { bob.report(open.meta.session_id); }) == ErrorCode::phase);
  const auto gt = fx.repo->ground_truth("synth001");
  CHECK(code_of([&] { bob.submit(open.meta.session_id, std::span(gt->data(), 3)); }) == ErrorCode::format);  // size errors travel as "format"
  CHECK(bob.submit(open.meta.session_id, *gt).closed);

  server.stop();
  serving.join();
  {
    std::lock_guard lock(lines_mu);
    CHECK(lines.size() >= 8);  // one line per request
  }

  HttpEndpoint nowhere("127.0.0.1", port, "alice", RetryPolicy{3, 5, 20});
  CHECK(code_of([&] { nowhere.start("synth000"); }) == ErrorCode::io);
}
