#include "tdist/schedule.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace tdist {

std::string_view kind_name(VehicleKind k) noexcept {
  return k == VehicleKind::controlled ? "con" : "sim";
}

std::string_view rule_name(Rule r) noexcept {
  switch (r) {
    case Rule::shape:
      return "shape";
    case Rule::r1:
      return "r1";
    case Rule::r2:
      return "r2";
    case Rule::r3:
      return "r3";
    case Rule::r4:
      return "r4";
    case Rule::r5:
      return "r5";
    case Rule::r10:
      return "r10";
    case Rule::r11:
      return "r11";
    case Rule::r12:
      return "r12";
    case Rule::r13:
      return "r13";
  }
  return "shape";
}

std::string to_string(const ObjectiveVector& o) {
  return "(" + std::to_string(o.level2) + ", " + std::to_string(o.level1) + ")";
}

Band Instance::band(StreetId s, int occupancy) const {
  const auto& m = model(s);
  const long long scaled = 10LL * occupancy;
  if (scaled < m.low_below) return Band::low;
  if (scaled >= m.heavy_from) return Band::heavy;
  return Band::medium;
}

std::optional<std::size_t> find_candidate(const Vehicle& vehicle, std::string_view route) {
  for (std::size_t i = 0; i < vehicle.candidates.size(); ++i) {
    if (vehicle.candidates[i].route.id == route) return i;
  }
  return std::nullopt;
}

Instance build_instance(std::shared_ptr<const Network> network, std::vector<Vehicle> vehicles, int quantum,
                        const TrafficBands& bands) {
  if (!network) throw std::invalid_argument("build_instance: no network");
  if (quantum <= 0) throw std::invalid_argument("build_instance: quantum must be positive");
  bands.validate();

  Instance inst;
  inst.network = network;
  inst.bands = bands;
  inst.quantum = quantum;
  inst.streets.reserve(network->size());
  for (const auto& s : network->streets()) {
    StreetModel m;
    m.capacity = capacity_of(s, bands);
    for (Band b : kBands) m.travel[static_cast<std::size_t>(b)] = travel_steps(s, b, quantum, bands);
    m.max_travel = m.travel[static_cast<std::size_t>(Band::heavy)];
    m.low_below = bands.low_tenths * m.capacity;
    m.heavy_from = bands.high_tenths * m.capacity;
    inst.streets.push_back(m);
  }

  std::unordered_set<std::string> vehicle_ids;
  std::unordered_set<std::string> route_ids;
  for (const auto& v : vehicles) {
    auto fail = [&](const std::string& why) { throw InconsistentBounds("vehicle '" + v.id + "': " + why); };
    if (!vehicle_ids.insert(v.id).second) fail("duplicate vehicle id");
    if (v.candidates.empty()) fail("no candidate route");
    if (!v.controlled()) {
      if (v.candidates.size() != 1) fail("a simulated vehicle has exactly one route");
      if (!v.fixed) fail("a simulated vehicle needs its committed times");
      const auto n = v.candidates.front().route.streets.size();
      if (v.fixed->enter.size() != n || v.fixed->exit.size() != n) fail("committed times do not cover the route");
      if (v.fixed->enter.front() != 0) fail("committed times must start at step 0");
      for (std::size_t k = 0; k < n; ++k) {
        if (v.fixed->enter[k] < 0 || v.fixed->exit[k] <= v.fixed->enter[k]) fail("committed exit must follow enter");
      }
    }
    for (const auto& c : v.candidates) {
      if (!route_ids.insert(c.route.id).second) fail("route id '" + c.route.id + "' is not unique");
      if (auto why = check_route(*network, c.route); !why.empty()) fail(why);
      if (c.route.streets.front() != v.origin) fail("route '" + c.route.id + "' does not start at the origin");
      if (c.route.streets.back() != v.destination) {
        fail("route '" + c.route.id + "' does not end at the destination");
      }
      if (c.bounds.size() != c.route.streets.size()) fail("bounds of '" + c.route.id + "' do not match the route");
      if (auto why = check_bounds(c.bounds); !why.empty()) fail("route '" + c.route.id + "': " + why);
      inst.horizon = std::max(inst.horizon, c.bounds.max_exit.back());
    }
    if (v.fixed) {
      for (int x : v.fixed->exit) inst.horizon = std::max(inst.horizon, x);
    }
  }
  inst.vehicles = std::move(vehicles);
  return inst;
}

int occupancy(const Schedule& schedule, StreetId street, int t) {
  int n = 0;
  for (const auto& plan : schedule) {
    for (const auto& v : plan.visits) {
      if (v.street == street && v.enter <= t && t < v.exit) ++n;
    }
  }
  return n;
}

namespace {

struct Presence {
  std::size_t vehicle;
  int enter;
  int exit;
};

// Visits of structurally valid plans, grouped by street.
class StreetLedger {
 public:
  void add(StreetId s, std::size_t vehicle, int enter, int exit) { by_street_[s].push_back({vehicle, enter, exit}); }

  int occupancy(StreetId s, int t) const {
    auto it = by_street_.find(s);
    if (it == by_street_.end()) return 0;
    int n = 0;
    for (const auto& p : it->second) n += (p.enter <= t && t < p.exit) ? 1 : 0;
    return n;
  }

  bool has_enter(StreetId s, int t) const {
    auto it = by_street_.find(s);
    if (it == by_street_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [t](const Presence& p) { return p.enter == t; });
  }

  std::set<std::pair<StreetId, int>> enter_events() const {
    std::set<std::pair<StreetId, int>> events;
    for (const auto& [s, list] : by_street_) {
      for (const auto& p : list) events.emplace(s, p.enter);
    }
    return events;
  }

 private:
  std::unordered_map<StreetId, std::vector<Presence>> by_street_;
};

// Plans whose route and street sequence match the instance; the rest are
// reported as shape/route violations and left out of occupancy counting.
std::vector<bool> structurally_valid(const Instance& inst, const Schedule& schedule, std::vector<Violation>* out) {
  std::vector<bool> ok(inst.vehicles.size(), false);
  auto report = [&](Rule r, const std::string& vehicle, std::string detail) {
    if (out) out->push_back({r, vehicle, std::nullopt, std::nullopt, std::move(detail)});
  };
  if (schedule.size() != inst.vehicles.size()) {
    report(Rule::shape, "", "schedule has " + std::to_string(schedule.size()) + " plans for " +
                                std::to_string(inst.vehicles.size()) + " vehicles");
  }
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    const Vehicle& v = inst.vehicles[i];
    if (i >= schedule.size()) {
      report(Rule::r1, v.id, "no route selected");
      continue;
    }
    const VehiclePlan& plan = schedule[i];
    if (plan.vehicle != v.id) {
      report(Rule::shape, v.id, "plan belongs to '" + plan.vehicle + "'");
      continue;
    }
    auto c = find_candidate(v, plan.route);
    if (!c) {
      report(v.controlled() ? Rule::r1 : Rule::r2, v.id, "route '" + plan.route + "' is not a possible route");
      continue;
    }
    const auto& streets = v.candidates[*c].route.streets;
    bool same = plan.visits.size() == streets.size();
    for (std::size_t k = 0; same && k < streets.size(); ++k) same = plan.visits[k].street == streets[k];
    if (!same) {
      report(Rule::shape, v.id, "enter/exit times do not cover exactly the streets of '" + plan.route + "'");
      continue;
    }
    ok[i] = true;
  }
  return ok;
}

}  // namespace

std::vector<Violation> check_schedule(const Instance& inst, const Schedule& schedule, const CheckOptions& options) {
  std::vector<Violation> out;
  const auto valid = structurally_valid(inst, schedule, &out);
  const Network& net = *inst.network;
  const int horizon = inst.horizon;
  auto in_time = [horizon](int t) { return 0 <= t && t <= horizon; };

  StreetLedger ledger;
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    if (!valid[i]) continue;
    for (const auto& visit : schedule[i].visits) ledger.add(visit.street, i, visit.enter, visit.exit);
  }

  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    if (!valid[i]) continue;
    const Vehicle& v = inst.vehicles[i];
    const VehiclePlan& plan = schedule[i];
    const Candidate& cand = v.candidates[*find_candidate(v, plan.route)];
    auto report = [&](Rule r, StreetId s, int step, std::string detail) {
      out.push_back({r, v.id, s, step, std::move(detail)});
    };

    // (b) enter windows and the origin
    for (std::size_t k = 0; k < plan.visits.size(); ++k) {
      const auto& visit = plan.visits[k];
      const auto& name = net.street(visit.street).name;
      if (k == 0) {
        if (visit.enter != 0) report(Rule::r4, visit.street, visit.enter, "origin " + name + " not entered at 0");
      } else if (v.controlled()) {
        const int lo = cand.bounds.min_enter[k];
        const int hi = cand.bounds.max_enter[k];
        if (visit.enter < lo || visit.enter > hi || !in_time(visit.enter)) {
          report(Rule::r3, visit.street, visit.enter,
                 "enter " + name + " at " + std::to_string(visit.enter) + " outside [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
        }
      }
      if (!v.controlled()) {
        if (visit.enter != v.fixed->enter[k] || visit.exit != v.fixed->exit[k]) {
          report(Rule::r2, visit.street, visit.enter, "simulated vehicle deviates from its committed times on " + name);
        }
      }
    }
    if (!v.controlled()) continue;

    // (c) exit windows
    for (const auto& visit : plan.visits) {
      const int max_travel = inst.model(visit.street).max_travel;
      if (visit.exit < visit.enter + 1 || visit.exit > visit.enter + max_travel || !in_time(visit.exit)) {
        report(Rule::r5, visit.street, visit.exit,
               "exit " + net.street(visit.street).name + " at " + std::to_string(visit.exit) + " outside [" +
                   std::to_string(visit.enter + 1) + ", " + std::to_string(visit.enter + max_travel) + "]");
      }
    }
    // (d) dynamic travel time at the entry occupancy
    for (const auto& visit : plan.visits) {
      const int n = ledger.occupancy(visit.street, visit.enter);
      const int need = inst.travel(visit.street, n);
      if (visit.exit < visit.enter + need) {
        report(Rule::r10, visit.street, visit.enter,
               "leaves " + net.street(visit.street).name + " after " + std::to_string(visit.exit - visit.enter) +
                   " steps, " + std::string(band_name(inst.band(visit.street, n))) + " traffic needs " +
                   std::to_string(need));
      }
    }
    // (e) link continuity between any two linked streets of the plan
    for (const auto& a : plan.visits) {
      for (const auto& b : plan.visits) {
        if (a.street == b.street || !net.linked(a.street, b.street)) continue;
        if (b.enter != a.exit) {
          report(Rule::r11, b.street, b.enter,
                 "exits " + net.street(a.street).name + " at " + std::to_string(a.exit) + " but enters " +
                     net.street(b.street).name + " at " + std::to_string(b.enter));
        }
      }
    }
  }

  // (f) street capacity and (g) roundabout capacity at every enter event
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    if (!valid[i]) continue;
    const Vehicle& v = inst.vehicles[i];
    for (const auto& visit : schedule[i].visits) {
      const int n = ledger.occupancy(visit.street, visit.enter);
      if ((v.controlled() || options.strict_capacity) && n > inst.model(visit.street).capacity) {
        out.push_back({Rule::r12, v.id, visit.street, visit.enter,
                       net.street(visit.street).name + " holds " + std::to_string(n) + " vehicles, capacity " +
                           std::to_string(inst.model(visit.street).capacity)});
      }
      if (auto r = inst.roundabout_of(visit.street)) {
        const auto& ra = net.roundabouts()[*r];
        int total = 0;
        for (StreetId m : ra.members) {
          if (ledger.has_enter(m, visit.enter)) total += ledger.occupancy(m, visit.enter);
        }
        if (total > ra.capacity) {
          out.push_back({Rule::r13, v.id, visit.street, visit.enter,
                         "roundabout " + ra.name + " holds " + std::to_string(total) + " vehicles, capacity " +
                             std::to_string(ra.capacity)});
        }
      }
    }
  }
  return out;
}

ObjectiveVector objective(const Instance& inst, const Schedule& schedule) {
  const auto valid = structurally_valid(inst, schedule, nullptr);
  StreetLedger ledger;
  ObjectiveVector obj;
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) {
    if (!valid[i]) continue;
    for (const auto& visit : schedule[i].visits) {
      ledger.add(visit.street, i, visit.enter, visit.exit);
      if (visit.street == inst.vehicles[i].destination) obj.level1 += visit.exit;
    }
  }
  for (const auto& [s, t] : ledger.enter_events()) obj.level2 += ledger.occupancy(s, t);
  return obj;
}

}  // namespace tdist
