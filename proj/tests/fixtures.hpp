#pragma once

// Small hand-built networks and instances shared by the unit tests.

#include <memory>
#include <string>
#include <vector>

#include "tdist/net.hpp"
#include "tdist/routes.hpp"
#include "tdist/schedule.hpp"

namespace fixture {

struct Arc {
  std::string name, from, to;
  double length;
  int lanes = 1;
};

/// Network over the given streets with every continuous non-U-turn link.
inline std::shared_ptr<const tdist::Network> network(const std::vector<Arc>& arcs,
                                                     const std::vector<std::pair<std::string, int>>& rings = {},
                                                     const std::vector<std::string>& ring_members = {}) {
  tdist::NetworkSpec spec;
  for (const auto& a : arcs) {
    tdist::NetworkSpec::StreetSpec s;
    s.name = a.name;
    s.from = a.from;
    s.to = a.to;
    s.length = a.length;
    s.lanes = a.lanes;
    for (const auto& m : ring_members) {
      if (m == a.name) s.roundabout = rings.front().first;
    }
    spec.streets.push_back(s);
  }
  for (const auto& a : arcs) {
    for (const auto& b : arcs) {
      if (a.name != b.name && a.to == b.from && b.to != a.from) spec.links.emplace_back(a.name, b.name);
    }
  }
  for (const auto& [name, cap] : rings) spec.roundabouts.push_back({name, cap});
  return std::make_shared<const tdist::Network>(tdist::Network::build(spec));
}

inline tdist::Route route(const tdist::Network& net, const std::string& id, const std::vector<std::string>& names) {
  tdist::Route r;
  r.id = id;
  for (const auto& n : names) r.streets.push_back(net.at(n));
  r.length = tdist::route_length(net, r.streets);
  return r;
}

/// Candidate whose windows run from free flow to free flow plus `slack` steps
/// per street (cumulative).
inline tdist::Candidate candidate(const tdist::Network& net, const std::string& id,
                                  const std::vector<std::string>& names, int quantum = 5, int slack = 2,
                                  const tdist::TrafficBands& bands = {}) {
  tdist::Candidate c;
  c.route = route(net, id, names);
  const auto lo = tdist::free_flow_bounds(net, c.route, quantum, bands);
  tdist::BoundsSide hi = lo;
  for (std::size_t k = 0; k < hi.enter.size(); ++k) {
    hi.enter[k] += static_cast<int>(k) * slack;
    hi.exit[k] += static_cast<int>(k + 1) * slack;
  }
  c.bounds = tdist::combine_bounds(lo, hi);
  return c;
}

inline tdist::Vehicle controlled(const std::string& id, std::vector<tdist::Candidate> cands) {
  tdist::Vehicle v;
  v.id = id;
  v.origin = cands.front().route.streets.front();
  v.destination = cands.front().route.streets.back();
  v.candidates = std::move(cands);
  return v;
}

/// Simulated vehicle with committed (enter, exit) steps per street.
inline tdist::Vehicle simulated(const tdist::Network& net, const std::string& id, const std::vector<std::string>& names,
                                const std::vector<std::pair<int, int>>& times) {
  tdist::Vehicle v;
  v.id = id;
  v.kind = tdist::VehicleKind::simulated;
  tdist::Candidate c;
  c.route = route(net, id + "_r0", names);
  tdist::FixedTimes f;
  for (auto [e, x] : times) {
    f.enter.push_back(e);
    f.exit.push_back(x);
  }
  c.bounds = {f.enter, f.enter, f.exit, f.exit};
  v.origin = c.route.streets.front();
  v.destination = c.route.streets.back();
  v.candidates = {std::move(c)};
  v.fixed = std::move(f);
  return v;
}

/// Plan from (street, enter, exit) triples.
inline tdist::VehiclePlan plan(const tdist::Network& net, const std::string& vehicle, const std::string& route,
                               const std::vector<std::tuple<std::string, int, int>>& visits) {
  tdist::VehiclePlan p{vehicle, route, {}};
  for (const auto& [s, e, x] : visits) p.visits.push_back({net.at(s), e, x});
  return p;
}

}  // namespace fixture
