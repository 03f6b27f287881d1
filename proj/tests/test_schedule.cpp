#include "doctest.h"

#include <random>
#include <set>

#include "asp_eval.hpp"
#include "fixtures.hpp"
#include "random_instance.hpp"
#include "tdist/asp.hpp"
#include "tdist/schedule.hpp"

using namespace tdist;

namespace {

// a: 175 m (3 steps of 5 s), b: 150 m (3 steps), c: 100 m side street
std::shared_ptr<const Network> toy() {
  return fixture::network({{"a", "p", "q", 175}, {"b", "q", "r", 150}, {"c", "q", "s", 100}});
}

std::set<std::string> rule_set(const std::vector<Violation>& vs) {
  std::set<std::string> out;
  for (const auto& v : vs) out.insert(std::string(rule_name(v.rule)));
  return out;
}

std::string joined(const std::set<std::string>& rules) {
  std::string out;
  for (const auto& r : rules) out += (out.empty() ? "" : " ") + r;
  return out;
}

}  // namespace

TEST_CASE("instance tables") {
  auto net = fixture::network({{"a", "p", "q", 200}, {"b", "q", "r", 40}});
  Candidate c;
  c.route = fixture::route(*net, "v1_r0", {"a", "b"});
  c.bounds = {{0, 3}, {0, 5}, {3, 4}, {4, 9}};
  const Instance inst = build_instance(net, {fixture::controlled("v1", {c})}, 5);
  CHECK(inst.horizon == 9);
  const StreetModel& a = inst.model(net->at("a"));
  CHECK(a.capacity == 25);
  CHECK(a.low_below == 100);   // 0.4 x 25, scaled by 10
  CHECK(a.heavy_from == 175);  // 0.7 x 25, scaled by 10
  CHECK(inst.band(net->at("a"), 9) == Band::low);
  CHECK(inst.band(net->at("a"), 10) == Band::medium);
  CHECK(inst.band(net->at("a"), 17) == Band::medium);
  CHECK(inst.band(net->at("a"), 18) == Band::heavy);
  CHECK(a.travel == std::array<int, 3>{4, 5, 10});  // 16 s, 24 s, 48 s at 5 s steps
  CHECK(a.max_travel == 10);

  const Instance empty = build_instance(net, {}, 5);
  CHECK(empty.horizon == 0);
  CHECK(empty.vehicles.empty());
}

TEST_CASE("instance validation") {
  auto net = toy();
  auto good = fixture::candidate(*net, "v1_r0", {"a", "b"});
  SUBCASE("bounds out of order") {
    auto bad = good;
    bad.bounds.max_enter[1] = bad.bounds.min_enter[1] - 1;
    CHECK_THROWS_AS(build_instance(net, {fixture::controlled("v1", {bad})}, 5), InconsistentBounds);
  }
  SUBCASE("broken route") {
    auto bad = good;
    bad.route.streets = {net->at("b"), net->at("a")};
    CHECK_THROWS_AS(build_instance(net, {fixture::controlled("v1", {bad})}, 5), InconsistentBounds);
  }
  SUBCASE("duplicate vehicle and route ids") {
    CHECK_THROWS_AS(build_instance(net, {fixture::controlled("v1", {good}), fixture::controlled("v1", {good})}, 5),
                    InconsistentBounds);
    CHECK_THROWS_AS(build_instance(net, {fixture::controlled("v1", {good, good})}, 5), InconsistentBounds);
  }
  SUBCASE("simulated vehicle without times") {
    auto sim = fixture::simulated(*net, "s1", {"a", "b"}, {{0, 3}, {3, 6}});
    CHECK_NOTHROW(build_instance(net, {sim}, 5));
    sim.fixed.reset();
    CHECK_THROWS_AS(build_instance(net, {sim}, 5), InconsistentBounds);
  }
}

TEST_CASE("occupancy counts enter <= t < exit") {
  auto net = toy();
  const StreetId a = net->at("a");
  Schedule one{fixture::plan(*net, "v1", "r", {{"a", 3, 6}})};
  CHECK(occupancy(one, a, 2) == 0);
  for (int t : {3, 4, 5}) CHECK(occupancy(one, a, t) == 1);
  CHECK(occupancy(one, a, 6) == 0);
  CHECK(occupancy(one, net->at("b"), 4) == 0);
  Schedule two{fixture::plan(*net, "v1", "r", {{"a", 2, 8}}), fixture::plan(*net, "v2", "r", {{"a", 4, 9}})};
  CHECK(occupancy(two, a, 4) == 2);
}

TEST_CASE("checker on hand-built schedules") {
  auto net = toy();
  const Instance inst = build_instance(
      net, {fixture::controlled("v1", {fixture::candidate(*net, "v1_r0", {"a", "b"})}),
            fixture::controlled("v2", {fixture::candidate(*net, "v2_r0", {"a", "c"})})},
      5);
  Schedule feasible{fixture::plan(*net, "v1", "v1_r0", {{"a", 0, 3}, {"b", 3, 6}}),
                    fixture::plan(*net, "v2", "v2_r0", {{"a", 0, 3}, {"c", 3, 5}})};
  CHECK(check_schedule(inst, feasible).empty());
  const auto eval = oracle::evaluate(export_asp_facts(inst), render_model(inst, feasible));
  CHECK(eval.violated.empty());

  SUBCASE("continuity") {
    Schedule s = feasible;
    s[0].visits[1] = {net->at("b"), 4, 7};
    auto vs = check_schedule(inst, s);
    CHECK(rule_set(vs).count("r11") == 1);
    std::size_t r11 = 0;
    for (const auto& v : vs) r11 += v.rule == Rule::r11;
    CHECK(r11 == 1);
  }
  SUBCASE("exit before the travel time") {
    Schedule s = feasible;
    s[0].visits[0].exit = 2;
    s[0].visits[1].enter = 2;
    CHECK(rule_set(check_schedule(inst, s)).count("r10") == 1);
  }
  SUBCASE("origin not entered at 0") {
    Schedule s = feasible;
    s[1].visits[0] = {net->at("a"), 1, 4};
    s[1].visits[1] = {net->at("c"), 4, 6};
    CHECK(rule_set(check_schedule(inst, s)).count("r4") == 1);
  }
  SUBCASE("unknown route") {
    Schedule s = feasible;
    s[0].route = "nope";
    CHECK(rule_set(check_schedule(inst, s)).count("r1") == 1);
  }
  SUBCASE("missing plan") {
    Schedule s{feasible[0]};
    CHECK_FALSE(check_schedule(inst, s).empty());
  }
}

TEST_CASE("capacity and roundabout budget") {
  // 8 m streets hold one car
  auto net = fixture::network({{"x", "p", "q", 8}, {"y", "q", "r", 8}});
  const Instance inst = build_instance(
      net, {fixture::controlled("v1", {fixture::candidate(*net, "v1_r0", {"x", "y"})}),
            fixture::controlled("v2", {fixture::candidate(*net, "v2_r0", {"x", "y"})})},
      5);
  Schedule s{fixture::plan(*net, "v1", "v1_r0", {{"x", 0, 1}, {"y", 1, 2}}),
             fixture::plan(*net, "v2", "v2_r0", {{"x", 0, 1}, {"y", 1, 2}})};
  CHECK(rule_set(check_schedule(inst, s)).count("r12") == 1);

  // a simulated vehicle may overfill a street unless the check is strict
  const Instance mixed = build_instance(
      net, {fixture::simulated(*net, "s1", {"x", "y"}, {{0, 1}, {1, 2}}),
            fixture::simulated(*net, "s2", {"x", "y"}, {{0, 1}, {1, 2}})},
      5);
  Schedule fixed{fixture::plan(*net, "s1", "s1_r0", {{"x", 0, 1}, {"y", 1, 2}}),
                 fixture::plan(*net, "s2", "s2_r0", {{"x", 0, 1}, {"y", 1, 2}})};
  CHECK(check_schedule(mixed, fixed).empty());
  CHECK(rule_set(check_schedule(mixed, fixed, {.strict_capacity = true})).count("r12") == 1);

  auto ring = fixture::network({{"e1", "a", "b", 40}, {"e2", "c", "d", 40}}, {{"ra", 1}}, {"e1", "e2"});
  const Instance rb = build_instance(ring, {fixture::controlled("v1", {fixture::candidate(*ring, "v1_r0", {"e1"})}),
                                            fixture::controlled("v2", {fixture::candidate(*ring, "v2_r0", {"e2"})})},
                                     5);
  Schedule both{fixture::plan(*ring, "v1", "v1_r0", {{"e1", 0, 1}}),
                fixture::plan(*ring, "v2", "v2_r0", {{"e2", 0, 1}})};
  CHECK(rule_set(check_schedule(rb, both)) == std::set<std::string>{"r13"});
}

TEST_CASE("objective") {
  auto net = toy();
  const Instance one = build_instance(net, {fixture::controlled("v1", {fixture::candidate(*net, "v1_r0", {"a", "b"})})}, 5);
  Schedule s{fixture::plan(*net, "v1", "v1_r0", {{"a", 0, 3}, {"b", 3, 6}})};
  CHECK(objective(one, s) == ObjectiveVector{2, 6});
  CHECK(to_string(objective(one, s)) == "(2, 6)");

  const Instance empty = build_instance(net, {}, 5);
  CHECK(objective(empty, {}) == ObjectiveVector{0, 0});

  // two vehicles entering a together: the (a, 0) event counts 2 once
  const Instance two = build_instance(
      net, {fixture::controlled("v1", {fixture::candidate(*net, "v1_r0", {"a"})}),
            fixture::controlled("v2", {fixture::candidate(*net, "v2_r0", {"a"})})},
      5);
  Schedule pair{fixture::plan(*net, "v1", "v1_r0", {{"a", 0, 3}}), fixture::plan(*net, "v2", "v2_r0", {{"a", 0, 3}})};
  CHECK(objective(two, pair) == ObjectiveVector{2, 6});
}

TEST_CASE("checker agrees with the rule-by-rule evaluator") {
  std::mt19937_64 rng(2024);
  int instances = 0, schedules = 0, compared = 0, feasible = 0;
  for (; instances < 250; ++instances) {
    const Instance inst = oracle::random_instance(rng);
    const std::string facts = export_asp_facts(inst);
    for (int k = 0; k < 8; ++k, ++schedules) {
      // Every fourth schedule moves simulated vehicles off their committed
      // times. Those times are facts, so such a model is no answer set at all:
      // both sides must reject it for r2, the remaining rules are moot.
      const bool moved_sims = k % 4 == 3;
      const Schedule s = oracle::random_schedule(inst, rng, moved_sims);
      const auto mine = check_schedule(inst, s);
      const auto eval = oracle::evaluate(facts, render_model(inst, s));
      INFO("instance " << instances << " schedule " << k << "\n" << facts << render_model(inst, s));
      const bool sims_kept = eval.violated.count("r2") == 0;
      if (moved_sims && !sims_kept) {
        CHECK(rule_set(mine).count("r2") == 1);
        continue;
      }
      REQUIRE(joined(rule_set(mine)) == joined(eval.violated));
      const auto obj = objective(inst, s);
      CHECK(obj.level2 == eval.level2);
      CHECK(obj.level1 == eval.level1);
      ++compared;
      feasible += mine.empty();
    }
  }
  MESSAGE(schedules << " schedules, " << compared << " compared rule by rule, " << feasible << " feasible");
  CHECK(compared >= 200);
  CHECK(feasible > 0);
}

TEST_CASE("occupancy is never negative and bounded by active vehicles") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Instance inst = oracle::random_instance(rng);
    const Schedule s = oracle::random_schedule(inst, rng);
    for (int t = 0; t <= inst.horizon; ++t) {
      int total = 0, active = 0;
      for (const auto& street : inst.network->streets()) total += occupancy(s, street.id, t);
      for (const auto& p : s) {
        bool spans = false;
        for (const auto& v : p.visits) spans |= v.enter <= t && t < v.exit;
        active += spans;
      }
      CHECK(total >= 0);
      // a vehicle can sit on several streets only when its own times overlap
      int overlaps = 0;
      for (const auto& p : s) {
        int here = 0;
        for (const auto& v : p.visits) here += v.enter <= t && t < v.exit;
        overlaps += std::max(0, here - 1);
      }
      CHECK(total <= active + overlaps);
    }
  }
}
