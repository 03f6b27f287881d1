#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "tdist/prep.hpp"

using namespace tdist;

namespace {

RawStreet raw(std::string id, std::string from, std::string to, double length, Usage usage = Usage::general) {
  RawStreet s;
  s.id = std::move(id);
  s.from = std::move(from);
  s.to = std::move(to);
  s.length = length;
  s.usage = usage;
  return s;
}

RawNetwork with_junctions(std::vector<RawStreet> streets) {
  RawNetwork n;
  for (const auto& s : streets) {
    for (const auto& j : {s.from, s.to}) {
      if (std::find(n.junctions.begin(), n.junctions.end(), j) == n.junctions.end()) n.junctions.push_back(j);
    }
  }
  n.streets = std::move(streets);
  n.links = derive_links(n.streets);
  return n;
}

// Four-arm roundabout: ring k0..k3 through r0..r3 (20 m each), arm n has an
// entry i<n> from x<n> and an exit o<n> to y<n>.
RawNetwork roundabout() {
  std::vector<RawStreet> s;
  for (int i = 0; i < 4; ++i) {
    const std::string r = "r" + std::to_string(i), next = "r" + std::to_string((i + 1) % 4);
    s.push_back(raw("k" + std::to_string(i), r, next, 20));
    s.push_back(raw("i" + std::to_string(i), "x" + std::to_string(i), r, 100));
    s.push_back(raw("o" + std::to_string(i), r, "y" + std::to_string(i), 100));
  }
  RawNetwork n = with_junctions(std::move(s));
  n.rings.push_back({"rb", {"k0", "k1", "k2", "k3"}});
  return n;
}

}  // namespace

TEST_CASE("validate names the first defect") {
  RawNetwork n = with_junctions({raw("a", "p", "q", 10), raw("b", "q", "r", 10)});
  CHECK_NOTHROW(validate(n));

  SUBCASE("dangling link") {
    n.links.emplace_back("a", "ghost");
    CHECK_THROWS_WITH_AS(validate(n), doctest::Contains("a -> ghost"), PrepError);
  }
  SUBCASE("link without a shared junction") {
    n.links.emplace_back("b", "a");
    CHECK_THROWS_WITH_AS(validate(n), doctest::Contains("b -> a"), PrepError);
  }
  SUBCASE("undeclared junction") {
    n.streets.push_back(raw("c", "r", "nowhere", 5));
    n.junctions.pop_back();
    CHECK_THROWS_AS(validate(n), PrepError);
  }
  SUBCASE("duplicate street") {
    n.streets.push_back(raw("a", "q", "r", 5));
    CHECK_THROWS_WITH_AS(validate(n), doctest::Contains("duplicate street 'a'"), PrepError);
  }
  SUBCASE("unknown ring street") {
    n.rings.push_back({"rb", {"zz"}});
    CHECK_THROWS_AS(validate(n), PrepError);
  }
}

TEST_CASE("derived links skip immediate U-turns") {
  const auto links = derive_links({raw("ab", "a", "b", 1), raw("ba", "b", "a", 1), raw("bc", "b", "c", 1)});
  const std::vector<std::pair<std::string, std::string>> expected{{"ab", "bc"}};
  auto sorted = links;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == expected);
}

TEST_CASE("pruning drops restricted and closed streets with their links") {
  RawNetwork n = with_junctions({raw("a", "p", "q", 10), raw("b", "q", "r", 10, Usage::restricted),
                                 raw("c", "q", "s", 10), raw("d", "s", "t", 10, Usage::no_traffic)});
  std::size_t removed = 0;
  const RawNetwork out = prune_non_drivable(n, &removed);
  CHECK(removed == 2);
  REQUIRE(out.streets.size() == 2);
  for (const auto& [x, y] : out.links) {
    CHECK(out.find(x) != nullptr);
    CHECK(out.find(y) != nullptr);
  }
  RawNetwork closed = with_junctions({raw("a", "p", "q", 10, Usage::no_traffic)});
  CHECK_THROWS_AS(prune_non_drivable(closed), EmptyNetwork);
}

TEST_CASE("usage names parse back") {
  for (Usage u : {Usage::general, Usage::restricted, Usage::no_traffic}) CHECK(parse_usage(usage_name(u)) == u);
  CHECK_FALSE(parse_usage("motorway"));
}

TEST_CASE("degree-two chains merge until none is left") {
  // p -a-> q -b-> r -c-> s, plus a branch at s so c's end is not degree two.
  RawNetwork n = with_junctions({raw("a", "p", "q", 10), raw("b", "q", "r", 20), raw("c", "r", "s", 30),
                                 raw("d", "s", "t", 5), raw("e", "s", "u", 5)});
  std::size_t passes = 0;
  const RawNetwork out = merge_degree_two(n, &passes);
  CHECK(passes >= 1);
  const RawStreet* chain = nullptr;
  for (const auto& s : out.streets) {
    if (s.sources.size() == 3) chain = &s;
  }
  REQUIRE(chain != nullptr);
  CHECK(chain->length == doctest::Approx(60));
  CHECK(chain->from == "p");
  CHECK(chain->to == "s");
  CHECK(chain->sources == std::vector<std::string>{"a", "b", "c"});
  CHECK(out.streets.size() == 3);
  // the merged street still feeds both branches
  std::size_t outgoing = 0;
  for (const auto& [x, y] : out.links) outgoing += x == chain->id;
  CHECK(outgoing == 2);
}

TEST_CASE("roundabout consolidation: one street per entry/exit pair") {
  const RawNetwork n = roundabout();
  const TrafficBands bands;
  std::map<std::string, std::size_t> expansions;
  const RawNetwork out = consolidate_roundabouts(n, bands, &expansions);
  CHECK(expansions.at("rb") == 12);  // 4 entries x 3 exits (not back out where it came in)
  REQUIRE(out.budgets.size() == 1);
  CHECK(out.budgets[0].capacity == 4 * capacity_of(20, 1, bands));

  std::size_t synthetic = 0;
  for (const auto& s : out.streets) {
    CHECK(s.id.rfind("k", 0) != 0);  // ring streets are gone
    if (!s.roundabout) continue;
    ++synthetic;
    CHECK(*s.roundabout == "rb");
  }
  CHECK(synthetic == 12);
  const RawStreet* one = out.find("rb__i0__o1");
  const RawStreet* three = out.find("rb__i0__o3");
  REQUIRE(one);
  REQUIRE(three);
  CHECK(one->length == doctest::Approx(20));
  CHECK(three->length == doctest::Approx(60));
  CHECK(three->sources == std::vector<std::string>{"k0", "k1", "k2"});
  CHECK(out.find("rb__i0__o0") == nullptr);
}

TEST_CASE("malformed roundabouts are rejected") {
  RawNetwork n = roundabout();
  n.rings[0].ring = {"k0", "k1", "k2"};  // open chain
  CHECK_THROWS_AS(consolidate_roundabouts(n, TrafficBands{}), MalformedRoundabout);
  n.rings[0].ring = {};
  CHECK_THROWS_AS(consolidate_roundabouts(n, TrafficBands{}), MalformedRoundabout);
}

TEST_CASE("simplify reports what it did") {
  RawNetwork n = roundabout();
  // a closed street and a chain hanging off arm 0's exit
  n.streets.push_back(raw("z", "y0", "w", 10, Usage::no_traffic));
  n.streets.push_back(raw("t1", "y0", "v1", 10));
  n.streets.push_back(raw("t2", "v1", "v2", 10));
  n.junctions.insert(n.junctions.end(), {"w", "v1", "v2"});
  n.links = derive_links(n.streets);
  const Simplified s = simplify(n, TrafficBands{});
  CHECK(s.report.removed_streets == 1);
  CHECK(s.report.roundabout_expansions.at("rb") == 12);
  CHECK(s.report.merged_chains == 1);
  CHECK(s.report.id_map.at("o0") == s.report.id_map.at("t2"));
  CHECK(s.report.id_map.count("k0") == 0);
  CHECK_FALSE(s.report.id_map.count("z"));
  REQUIRE(s.network.roundabouts().size() == 1);
  CHECK(s.network.roundabouts()[0].members.size() == 12);
}

TEST_CASE("quantum choice minimises discretisation error") {
  // 14 s + 12 s of free flow: 26 s continuous, 30 s at 5 s steps, 40 s at 10 s steps
  RawNetwork n = with_junctions({raw("a", "p", "q", 175), raw("b", "q", "r", 150), raw("c", "q", "s", 10)});
  const Network net = to_network(n);
  const TrafficBands bands;
  const std::vector<std::vector<StreetId>> probe{{net.at("a"), net.at("b")}};
  CHECK(discretisation_error(net, 5, probe, bands) == doctest::Approx(4.0));
  CHECK(discretisation_error(net, 10, probe, bands) == doctest::Approx(14.0));
  CHECK(choose_quantum(net, {10, 5, 20}, probe, bands) == 5);
  CHECK_THROWS_AS(choose_quantum(net, {}, probe, bands), std::invalid_argument);
  // 125 m is exactly 10 s: 5 and 10 both exact, the larger wins
  RawNetwork m = with_junctions({raw("a", "p", "q", 125)});
  const Network single = to_network(m);
  CHECK(choose_quantum(single, {5, 10}, {{single.at("a")}}, bands) == 10);
}
