#include "doctest.h"

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tdist/cli.hpp"

using namespace tdist;
namespace fs = std::filesystem;

namespace {

const char* kToy = R"({
  "network": {"streets": [
    {"id": "a", "from": "p", "to": "q", "length": 175},
    {"id": "b", "from": "q", "to": "r", "length": 175},
    {"id": "c", "from": "q", "to": "s", "length": 100}]},
  "demand": [{"id": "v1", "origin": "a", "destination": "b", "arrival": 0}],
  "config": {"quantum": 5}
})";

const char* kRing = R"({
  "network": {
    "streets": [
      {"id": "k0", "from": "r0", "to": "r1", "length": 10},
      {"id": "k1", "from": "r1", "to": "r2", "length": 10},
      {"id": "k2", "from": "r2", "to": "r3", "length": 10},
      {"id": "k3", "from": "r3", "to": "r0", "length": 10},
      {"id": "i0", "from": "x0", "to": "r0", "length": 100},
      {"id": "o1", "from": "r1", "to": "y1", "length": 100},
      {"id": "i2", "from": "x2", "to": "r2", "length": 100},
      {"id": "o3", "from": "r3", "to": "y3", "length": 100}
    ],
    "roundabouts": [{"id": "rb", "ring": ["k0", "k1", "k2", "k3"]}]
  },
  "demand": [
    {"id": "v1", "origin": "i0", "destination": "o3", "arrival": 0},
    {"id": "v2", "origin": "i2", "destination": "o1", "arrival": 0}
  ]
})";

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

/// Scratch directory removed at the end of each test.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("tdist_cli_" + std::to_string(std::hash<const void*>{}(this)));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return path(name);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string read(const std::string& name) const {
    std::ifstream f(dir / name);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }
};

}  // namespace

TEST_CASE("solve the toy scenario and check its schedule") {
  Scratch tmp;
  const auto toy = tmp.file("toy.json", kToy);
  const Run r = cli({"solve", toy, "-o", tmp.path("m.lp"), "--export-facts", tmp.path("f.lp")});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("status: optimal") != std::string::npos);
  CHECK(r.out.find("objective: (2, 6)") != std::string::npos);
  CHECK(r.out.find("vehicle v1 route v1_r0: a@0-3 b@3-6") != std::string::npos);
  CHECK(tmp.read("f.lp").find("capacity(a,22).") != std::string::npos);

  const Run ok = cli({"check", toy, tmp.path("m.lp")});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("feasible, objective (2, 6)") != std::string::npos);

  // a schedule that leaves the destination too early
  std::string model = tmp.read("m.lp");
  model.replace(model.find("exit(v1,b,6)"), 12, "exit(v1,b,4)");
  tmp.file("bad.lp", model);
  const Run bad = cli({"check", toy, tmp.path("bad.lp")});
  CHECK(bad.code == kExitInfeasible);
  CHECK(bad.out.find("violation(s)") != std::string::npos);

  tmp.file("ghost.lp", "solutionRoute(v9,v9_r0).\n");
  CHECK(cli({"check", toy, tmp.path("ghost.lp")}).code == kExitParse);
}

TEST_CASE("solving is reproducible") {
  Scratch tmp;
  const auto ring = tmp.file("ring.json", kRing);
  const Run a = cli({"solve", ring, "--seed", "4"});
  const Run b = cli({"solve", ring, "--seed", "4"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
}

TEST_CASE("input errors exit with the parse code") {
  Scratch tmp;
  CHECK(cli({"solve", tmp.path("missing.json")}).code == kExitParse);
  CHECK(cli({"solve", tmp.file("junk.json", "{ not json")}).code == kExitParse);
  CHECK(cli({"frobnicate"}).code == kExitParse);
  CHECK(cli({}).code == kExitParse);
  CHECK(cli({"simulate", tmp.file("t.json", kToy), "--policy", "fastest"}).code == kExitParse);

  nlohmann::json doc = nlohmann::json::parse(kToy);
  doc["network"]["links"] = nlohmann::json::array({nlohmann::json::array({"a", "zz"})});
  const Run r = cli({"preprocess", tmp.file("dangling.json", doc.dump())});
  CHECK(r.code == kExitParse);
  CHECK(r.err.find("zz") != std::string::npos);
}

TEST_CASE("preprocess expands the roundabout") {
  Scratch tmp;
  const Run r = cli({"preprocess", tmp.file("ring.json", kRing)});
  REQUIRE(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["report"]["roundabout_expansions"]["rb"] == 4);  // 2 entries x 2 exits
  std::set<std::string> streets;
  for (const auto& s : doc["network"]["streets"]) streets.insert(s["id"].get<std::string>());
  CHECK(streets.count("rb__i0__o3"));
  CHECK(streets.count("rb__i2__o1"));
  CHECK_FALSE(streets.count("k0"));
  // ring streets dissolve into the expansions; the arms keep their ids
  CHECK(doc["report"]["id_map"].size() == 4);
  for (const char* id : {"i0", "o1", "i2", "o3"}) CHECK(doc["report"]["id_map"][id] == id);
}

TEST_CASE("simulate prints the KPI table") {
  Scratch tmp;
  const auto toy = tmp.file("toy.json", kToy);
  const Run r = cli({"simulate", toy, "--policy", "both", "--csv", tmp.path("k.csv"), "--events", tmp.path("e.log")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("optimized") != std::string::npos);
  CHECK(r.out.find("shortest") != std::string::npos);
  CHECK(r.out.find("Total Duration [s]") != std::string::npos);
  // 350 m at 12.5 m/s
  CHECK(r.out.find("28.00") != std::string::npos);
  const std::string csv = tmp.read("k.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(tmp.read("e.log").find("enter v1 b") != std::string::npos);

  nlohmann::json doc = nlohmann::json::parse(kToy);
  doc["demand"] = nlohmann::json::array();
  const Run empty = cli({"simulate", tmp.file("empty.json", doc.dump())});
  CHECK(empty.code == kExitOk);
  CHECK(empty.out.find("0.00") != std::string::npos);
  CHECK(empty.out.find("1.00") == std::string::npos);
}

TEST_CASE("grid writes a loadable scenario") {
  Scratch tmp;
  const Run g = cli({"grid", "--rows", "3", "--cols", "3", "--vehicles", "5", "--seed", "2", "-o", tmp.path("g.json")});
  REQUIRE(g.code == kExitOk);
  CHECK(cli({"grid", "--rows", "3", "--cols", "3", "--vehicles", "5", "--seed", "2"}).out == tmp.read("g.json"));
  const Run s = cli({"simulate", tmp.path("g.json"), "--policy", "shortest"});
  CHECK(s.code == kExitOk);
  CHECK(cli({"grid", "--from", "up"}).code == kExitParse);
}
