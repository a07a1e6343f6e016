#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <string>
#include <sys/wait.h>

#include "evcam/event_io.hpp"
#include "evcam/image_io.hpp"
#include "evcam/pipeline.hpp"
#include "support/gen.hpp"
#include "support/tempdir.hpp"

using namespace evcam;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// `env` is a prefix such as "EVCAM_WORKERS=3 ".
Run evcam_run(const std::vector<std::string>& args, const std::string& env = "") {
  static support::TempDir scratch("cli-stderr");
  const fs::path err_file = scratch / "stderr.txt";
  std::string cmd = env + quote(EVCAM_BIN);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>" + quote(err_file.string());
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = support::slurp_text(err_file);
  return r;
}

void check_snapshot(const std::string& name, const std::string& text) {
  const fs::path path = fs::path(EVCAM_SNAPSHOT_DIR) / (name + ".txt");
  if (std::getenv("UPDATE_SNAPSHOTS") != nullptr || !fs::exists(path)) {
    support::spit(path, text);
    MESSAGE("wrote snapshot " << path.string());
    return;
  }
  CHECK_MESSAGE(support::slurp_text(path) == text, "help text changed; rerun with UPDATE_SNAPSHOTS=1 to accept: " << name);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help snapshots") {
  const Run top = evcam_run({"--help"});
  CHECK(top.code == 0);
  check_snapshot("help", top.out);
  for (const char* sub : {"expose", "events", "dataset", "snn-demo", "fusion-check", "bench"}) {
    const Run r = evcam_run({sub, "--help"});
    INFO(sub);
    CHECK(r.code == 0);
    CHECK(r.out.find("--help") != std::string::npos);
    check_snapshot(std::string("help-") + sub, r.out);
  }
}

TEST_CASE("usage errors exit 64") {
  CHECK(evcam_run({}).code == 64);
  CHECK(evcam_run({"frobnicate"}).code == 64);
  const Run neg = evcam_run({"expose", "in.png", "out.png", "--alpha", "-1"});
  CHECK(neg.code == 64);
  CHECK(neg.err.find("--alpha") != std::string::npos);
  CHECK(evcam_run({"events", "in.png", "out", "--emit", "gif"}).code == 64);
  CHECK(evcam_run({"events", "in.png", "out", "--flow", "spiral"}).code == 64);
  CHECK(evcam_run({"dataset", "in", "out", "--alphas", "[1,0.5]"}).code == 64);
  CHECK(evcam_run({"dataset", "in", "out", "--size", "big"}).code == 64);
}

TEST_CASE("missing input is fatal") {
  support::TempDir dir("cli-missing");
  const Run r = evcam_run({"expose", (dir / "nope.png").string(), (dir / "out.png").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("nope.png") != std::string::npos);
}

TEST_CASE("expose at alpha 1 is the identity within one level") {
  support::TempDir dir("cli-expose");
  gen::Gen g(201);
  const Image src = g.image_u8(37, 21);
  write_png((dir / "in.png").string(), src);
  const Run r = evcam_run({"expose", (dir / "in.png").string(), (dir / "out.png").string(), "--alpha", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("evcam: config {") != std::string::npos);
  const Image out = read_image((dir / "out.png").string());
  REQUIRE(out.width() == 37);
  for (std::size_t i = 0; i < src.data().size(); ++i) CHECK(std::fabs(out.data()[i] - src.data()[i]) <= 1.0f / 255.0f);
}

TEST_CASE("null inputs give empty event frames") {
  support::TempDir dir("cli-null");
  write_png((dir / "gray.png").string(), Image(24, 16, 3, 0.5f));
  Image ramp(24, 16, 3);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 24; ++x) {
      for (std::size_t c = 0; c < 3; ++c) ramp.at(x, y, c) = static_cast<float>(x) / 23.0f;
    }
  }
  write_png((dir / "ramp.png").string(), ramp);

  const Run gray = evcam_run({"events", (dir / "gray.png").string(), (dir / "gray").string(), "--emit", "evtf,csv"});
  REQUIRE(gray.code == 0);
  CHECK(read_evtf((dir / "gray.evtf").string()).empty());
  CHECK(support::slurp_text(dir / "gray.csv") == "x,y,polarity\n");

  const Run perp = evcam_run({"events", (dir / "ramp.png").string(), (dir / "ramp").string(), "--flow", "fixed",
                              "--theta", "1.5707963267948966"});
  REQUIRE(perp.code == 0);
  CHECK(read_evtf((dir / "ramp.evtf").string()).empty());
  CHECK(nlohmann::json::parse(perp.out)["events_on"] == 0);

  const Run along = evcam_run({"events", (dir / "ramp.png").string(), (dir / "along").string(), "--flow", "fixed",
                               "--theta", "0", "--threshold", "0.01"});
  REQUIRE(along.code == 0);
  CHECK_FALSE(read_evtf((dir / "along.evtf").string()).empty());
}

TEST_CASE("same seed reproduces the event file, with any worker count") {
  support::TempDir dir("cli-seed");
  gen::Gen g(202);
  write_png((dir / "in.png").string(), g.image_u8(64, 48));
  const std::string in = (dir / "in.png").string();
  CHECK(evcam_run({"events", in, (dir / "a").string(), "--seed", "7", "--workers", "1"}).code == 0);
  CHECK(evcam_run({"events", in, (dir / "b").string(), "--seed", "7", "--workers", "4"}).code == 0);
  CHECK(evcam_run({"events", in, (dir / "c").string(), "--seed", "8"}).code == 0);
  CHECK(support::slurp(dir / "a.evtf") == support::slurp(dir / "b.evtf"));
  CHECK(support::slurp(dir / "a.evtf") != support::slurp(dir / "c.evtf"));
}

TEST_CASE("events writes every requested format") {
  support::TempDir dir("cli-emit");
  gen::Gen g(203);
  write_png((dir / "in.png").string(), g.image_u8(20, 20));
  const Run r = evcam_run({"events", (dir / "in.png").string(), (dir / "out.evtf").string(), "--emit", "evtf,csv,png",
                           "--flow-png", (dir / "flow.png").string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"out.evtf", "out.csv", "out.png", "flow.png"}) CHECK(fs::exists(dir / f));
}

TEST_CASE("dataset with under- and overexposure") {
  support::TempDir in("cli-ds"), out("cli-ds-out");
  gen::Gen g(204);
  fs::create_directories(in.path() / "JPEGImages");
  for (int i = 0; i < 3; ++i) write_png((in / ("JPEGImages/" + std::to_string(i) + ".png")).string(), g.image_u8(30, 20));
  const Run r = evcam_run({"dataset", in.path().string(), out.path().string(), "--layout", "voc", "--alphas",
                           "0.2,5.0", "--size", "64x48", "--viz"});
  REQUIRE(r.code == 0);
  const auto entries = read_manifest(out / "manifest.jsonl");
  REQUIRE(entries.size() == 6);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries[i].alpha == (i % 2 == 0 ? 0.2 : 5.0));
    CHECK(entries[i].width == 64);
    CHECK(fs::exists(out / entries[i].out_viz));
  }
  CHECK(nlohmann::json::parse(r.out)["entries"] == 6);

  support::TempDir empty("cli-ds-empty");
  CHECK(evcam_run({"dataset", empty.path().string(), (empty / "o").string(), "--layout", "voc"}).code == 1);
}

TEST_CASE("dataset with a corrupt image exits 2") {
  support::TempDir in("cli-bad"), out("cli-bad-out");
  gen::Gen g(205);
  write_png((in / "ok.png").string(), g.image_u8(10, 10));
  support::spit(in / "bad.jpg", "garbage");
  const Run r = evcam_run({"dataset", in.path().string(), out.path().string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.jpg") != std::string::npos);
  CHECK(read_manifest(out / "manifest.jsonl").size() == 2);
}

TEST_CASE("snn-demo reports per-step spikes") {
  support::TempDir dir("cli-snn");
  gen::Gen g(206);
  write_evtf((dir / "f.evtf").string(), g.frame(12, 9, 1));
  const Run r = evcam_run({"snn-demo", (dir / "f.evtf").string(), "--raster", (dir / "r.png").string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["t_steps"] == 4);
  CHECK(j["steps"].size() == 4);
  CHECK(j["lif"]["lambda"].get<double>() < 1.0);
  CHECK(fs::exists(dir / "r.png"));

  const Run lit = evcam_run({"snn-demo", (dir / "f.evtf").string(), "--paper-literal", "--t", "6"});
  REQUIRE(lit.code == 0);
  const auto jl = nlohmann::json::parse(lit.out);
  CHECK(jl["lif"]["lambda"].get<double>() > 1.0);
  CHECK(jl["lif"]["leak"] == "paper-literal");
  CHECK(jl["steps"].size() == 6);
}

TEST_CASE("fusion-check passes") {
  const Run r = evcam_run({"fusion-check", "--trials", "3", "--hw", "8"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["all_passed"] == true);
}

TEST_CASE("bench reports a rate") {
  const Run r = evcam_run({"bench", "--images", "4", "--size", "32", "--floor", "0"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["images_per_second"].get<double>() > 0.0);
}

TEST_CASE("config file values apply unless a flag overrides them") {
  support::TempDir dir("cli-config");
  gen::Gen g(207);
  write_png((dir / "in.png").string(), g.image_u8(16, 16));
  support::spit(dir / "run.conf", "# event settings\nthreshold = 0.05\nseed = 3\nworkers = 2\n");
  const std::string in = (dir / "in.png").string(), conf = (dir / "run.conf").string();

  const Run r = evcam_run({"--config", conf, "events", in, (dir / "a").string(), "--seed", "9"});
  REQUIRE(r.code == 0);
  const auto pos = r.err.find("evcam: config ");
  REQUIRE(pos != std::string::npos);
  const auto logged = nlohmann::json::parse(r.err.substr(pos + 14, r.err.find('\n', pos) - pos - 14));
  CHECK(logged["flags"]["threshold"] == "0.05");
  CHECK(logged["flags"]["seed"] == "9");
  CHECK(logged["config_file"] == conf);

  CHECK(evcam_run({"events", in, (dir / "b").string(), "--threshold", "0.05", "--seed", "9"}).code == 0);
  CHECK(support::slurp(dir / "a.evtf") == support::slurp(dir / "b.evtf"));

  support::spit(dir / "bad.conf", "colour = red\n");
  CHECK(evcam_run({"--config", (dir / "bad.conf").string(), "events", in, (dir / "c").string()}).code == 64);
  CHECK(evcam_run({"--config", (dir / "missing.conf").string(), "events", in, (dir / "c").string()}).code == 64);
}

TEST_CASE("worker count comes from the environment") {
  support::TempDir dir("cli-env");
  gen::Gen g(208);
  write_png((dir / "in.png").string(), g.image_u8(16, 16));
  const Run r = evcam_run({"events", (dir / "in.png").string(), (dir / "a").string()}, "EVCAM_WORKERS=3 ");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("\"workers\":\"3\"") != std::string::npos);
}

}
