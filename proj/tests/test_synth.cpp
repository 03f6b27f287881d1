#include "doctest.h"

#include <set>

#include "tdist/prep.hpp"
#include "tdist/routes.hpp"
#include "tdist/synth.hpp"

using namespace tdist;

TEST_CASE("grid layout") {
  const RawNetwork g = make_grid({});
  CHECK_NOTHROW(validate(g));
  // 8 x 7 blocks per direction and axis, plus an entry and an exit per rim side
  CHECK(g.streets.size() == 4 * 8 * 7 + 2 * 4 * 8);
  CHECK(grid_entries(g).size() == 32);
  CHECK(grid_exits(g).size() == 32);
  CHECK(g.find("e_0_0")->to == "j_0_1");
  CHECK(g.find("w_0_1")->to == "j_0_0");
  CHECK(g.find("s_0_0")->to == "j_1_0");
  CHECK(g.find("n_1_0")->to == "j_0_0");
  CHECK(g.find("in_west_3")->to == "j_3_0");
  CHECK(g.find("out_east_3")->from == "j_3_7");

  const Simplified s = simplify(g, TrafficBands{});
  CHECK(s.report.merged_chains == 0);
  CHECK(s.network.size() == g.streets.size());
  // every entry reaches every exit
  for (const auto& o : {"in_west_0", "in_north_7"}) {
    for (const auto& d : grid_exits(g)) {
      CHECK_NOTHROW(enumerate_routes(s.network, s.network.at(o), s.network.at(d), 1));
    }
  }
}

TEST_CASE("jittered grid is reproducible and keeps both directions equal") {
  GridOptions o;
  o.rows = o.cols = 4;
  o.jitter = 0.3;
  o.seed = 5;
  const RawNetwork a = make_grid(o), b = make_grid(o);
  REQUIRE(a.streets.size() == b.streets.size());
  for (std::size_t i = 0; i < a.streets.size(); ++i) CHECK(a.streets[i].length == b.streets[i].length);
  CHECK(a.find("e_1_1")->length == a.find("w_1_2")->length);
  CHECK(a.find("e_1_1")->length >= 70.0);
  CHECK(a.find("e_1_1")->length <= 130.0);
  o.jitter = 1.0;
  CHECK_THROWS_AS(make_grid(o), std::invalid_argument);
}

TEST_CASE("random demand") {
  const RawNetwork g = make_grid({});
  DemandOptions d;
  d.vehicles = 300;
  d.spread_s = 120;
  d.first_arrival = 10;
  d.origins = grid_entries(g);
  d.destinations = grid_exits(g);
  d.seed = 4;
  const auto demand = random_demand(d);
  REQUIRE(demand.size() == 300);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    const auto& v = demand[i];
    ids.insert(v.id);
    CHECK(v.arrival >= 10);
    CHECK(v.arrival < 130);
    if (i > 0) CHECK(demand[i - 1].arrival <= v.arrival);
    CHECK(v.kind == VehicleKind::controlled);
    // never leave where it came in
    CHECK(v.origin.substr(3) != v.destination.substr(4));
  }
  CHECK(ids.size() == 300);
  const auto again = random_demand(d);
  for (std::size_t i = 0; i < demand.size(); ++i) CHECK(again[i].id == demand[i].id);
}
