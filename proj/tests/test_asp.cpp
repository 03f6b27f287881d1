#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "random_instance.hpp"
#include "tdist/asp.hpp"
#include "tdist/solver.hpp"

using namespace tdist;

namespace {

std::shared_ptr<const Network> two_streets() {
  return fixture::network({{"s1", "p", "q", 175}, {"s2", "q", "r", 150}, {"s3", "q", "t", 100}});
}

Instance one_vehicle(const std::shared_ptr<const Network>& net) {
  Candidate c = fixture::candidate(*net, "r1", {"s1", "s2"}, 5, 0);
  c.bounds.max_enter = {0, 4};
  c.bounds.max_exit = {4, 7};
  return build_instance(net, {fixture::controlled("v1", {c})}, 5);
}

bool has_line(const std::string& text, const std::string& line) {
  return text.find("\n" + line + "\n") != std::string::npos || text.rfind(line + "\n", 0) == 0;
}

}  // namespace

TEST_CASE("fact export") {
  auto net = two_streets();
  const Instance inst = one_vehicle(net);
  const std::string facts = export_asp_facts(inst);
  CHECK(has_line(facts, "vehicle(v1,con)."));
  CHECK(has_line(facts, "origin(v1,s1)."));
  CHECK(has_line(facts, "destination(v1,s2)."));
  CHECK(has_line(facts, "possibleRouteOfVehicle(v1,r1)."));
  CHECK(has_line(facts, "streetOnRoute(s1,r1,0,0)."));
  CHECK(has_line(facts, "streetOnRoute(s2,r1,3,4)."));
  CHECK(has_line(facts, "link(s1,s2)."));
  CHECK(has_line(facts, "capacity(s1,22)."));
  CHECK(has_line(facts, "time(7)."));
  CHECK(facts.find("s3") == std::string::npos);  // not on any candidate

  const Instance empty = build_instance(net, {}, 5);
  std::string atoms;
  for (char c : export_asp_facts(empty)) atoms += c;
  CHECK(has_line(atoms, "time(0)."));
  CHECK(atoms.find("vehicle(") == std::string::npos);
  CHECK(atoms.find("streetOnRoute(") == std::string::npos);
}

TEST_CASE("model import") {
  auto net = two_streets();
  const Instance inst = one_vehicle(net);
  const Schedule s = import_asp_model(
      "solutionRoute(v1,r1). enter(v1,s1,0). exit(v1,s1,3). enter(v1,s2,3). exit(v1,s2,6).", inst);
  REQUIRE(s.size() == 1);
  CHECK(s[0].route == "r1");
  CHECK(s[0].visits == std::vector<StreetVisit>{{net->at("s1"), 0, 3}, {net->at("s2"), 3, 6}});
  CHECK(check_schedule(inst, s).empty());

  CHECK_THROWS_AS(import_asp_model("", inst), IncompleteModel);
  CHECK_THROWS_AS(import_asp_model("solutionRoute(v1,r1). enter(v1,s1,0). exit(v1,s1,3).", inst), IncompleteModel);
  CHECK_THROWS_AS(import_asp_model("enter(v1,s1,zero).", inst), ParseError);
  CHECK_THROWS_AS(import_asp_model("solutionRoute(v9,r1).", inst), ParseError);
  CHECK_THROWS_AS(import_asp_model("solutionRoute(v1,r1). solutionRoute(v1,r2).", inst), ParseError);
  CHECK_THROWS_AS(import_asp_model("enter(v1,s1,0). enter(v1,s1,1).", inst), ParseError);
  CHECK_THROWS_AS(import_asp_model("solutionRoute(v1,r1,x).", inst), ParseError);
  // other predicates are ignored
  CHECK_NOTHROW(import_asp_model("foo(1). solutionRoute(v1,r1). enter(v1,s1,0). exit(v1,s1,3). enter(v1,s2,3). "
                                 "exit(v1,s2,6). bar.",
                                 inst));
}

TEST_CASE("round trips are lossless") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const Instance inst = oracle::random_instance(rng);
    for (int k = 0; k < 3; ++k) {
      const Schedule s = oracle::random_schedule(inst, rng);
      CHECK(import_asp_model(render_model(inst, s), inst) == s);
    }
    SolverConfig cfg;
    cfg.time_limit = 5;
    const SolveResult r = solve_exact(inst, cfg);
    if (r.has_schedule()) {
      const Schedule back = import_asp_model(render_model(inst, r.schedule), inst);
      CHECK(back == r.schedule);
      CHECK(check_schedule(inst, back).empty());
    }
  }
}
