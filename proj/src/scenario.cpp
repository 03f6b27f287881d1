#include "tdist/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace tdist {

using nlohmann::json;

bool valid_id(std::string_view id) noexcept {
  if (id.empty() || id[0] < 'a' || id[0] > 'z') return false;
  for (std::size_t i = 0; i < id.size(); ++i) {
    const char c = id[i];
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
    if (c == '_' && i + 1 < id.size() && id[i + 1] == '_') return false;  // "__" is reserved for derived ids
  }
  return true;
}

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ScenarioError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ScenarioError(where + ": '" + key + "' has the wrong type");
  }
}

template <class T>
T optional_field(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, where);
}

std::string checked_id(const json& j, const char* key, const std::string& where) {
  auto id = field<std::string>(j, key, where);
  if (!valid_id(id)) throw ScenarioError(where + ": '" + id + "' is not a valid id ([a-z][a-z0-9_]*, no '__')");
  return id;
}

int tenths(double fraction, const char* what) {
  const double scaled = fraction * 10.0;
  const long long r = std::llround(scaled);
  if (std::abs(scaled - static_cast<double>(r)) > 1e-9) {
    throw ScenarioError(std::string("config.bands: ") + what + " must be a multiple of 0.1");
  }
  return static_cast<int>(r);
}

RawNetwork parse_network(const json& j) {
  if (!j.is_object()) throw ScenarioError("network: expected an object");
  RawNetwork net;
  std::set<std::string> junctions;
  if (j.contains("junctions")) {
    for (const auto& jj : field<json>(j, "junctions", "network")) {
      if (!jj.is_string() || !valid_id(jj.get<std::string>())) throw ScenarioError("network.junctions: invalid id");
      net.junctions.push_back(jj.get<std::string>());
    }
  }
  const json streets = field<json>(j, "streets", "network");
  if (!streets.is_array()) throw ScenarioError("network.streets: expected an array");
  for (std::size_t i = 0; i < streets.size(); ++i) {
    const auto& s = streets[i];
    const std::string where = "network.streets[" + std::to_string(i) + "]";
    RawStreet rs;
    rs.id = checked_id(s, "id", where);
    rs.from = checked_id(s, "from", where);
    rs.to = checked_id(s, "to", where);
    rs.length = field<double>(s, "length", where);
    rs.lanes = optional_field<int>(s, "lanes", 1, where);
    const auto usage = optional_field<std::string>(s, "usage", "general", where);
    auto u = parse_usage(usage);
    if (!u) throw ScenarioError(where + ": unknown usage '" + usage + "'");
    rs.usage = *u;
    if (!j.contains("junctions")) {
      junctions.insert(rs.from);
      junctions.insert(rs.to);
    }
    net.streets.push_back(std::move(rs));
  }
  if (!j.contains("junctions")) net.junctions.assign(junctions.begin(), junctions.end());
  if (j.contains("links")) {
    for (const auto& l : field<json>(j, "links", "network")) {
      if (!l.is_array() || l.size() != 2 || !l[0].is_string() || !l[1].is_string()) {
        throw ScenarioError("network.links: each link is a pair of street ids");
      }
      net.links.emplace_back(l[0].get<std::string>(), l[1].get<std::string>());
    }
  } else {
    net.links = derive_links(net.streets);
  }
  if (j.contains("roundabouts")) {
    const json rings = field<json>(j, "roundabouts", "network");
    for (std::size_t i = 0; i < rings.size(); ++i) {
      const std::string where = "network.roundabouts[" + std::to_string(i) + "]";
      RoundaboutRing r;
      r.id = checked_id(rings[i], "id", where);
      r.ring = field<std::vector<std::string>>(rings[i], "ring", where);
      net.rings.push_back(std::move(r));
    }
  }
  return net;
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw ScenarioError("config: expected an object");
  const std::string w = "config";
  c.quantum = optional_field<int>(j, "quantum", c.quantum, w);
  if (c.quantum <= 0) throw ScenarioError("config.quantum must be positive");
  c.search.route_limit = optional_field<std::size_t>(j, "route_limit", c.search.route_limit, w);
  c.search.similarity_threshold = optional_field<double>(j, "similarity_threshold", c.search.similarity_threshold, w);
  c.search.top_k = optional_field<std::size_t>(j, "top_k", c.search.top_k, w);
  c.solver.time_limit = optional_field<double>(j, "time_limit", c.solver.time_limit, w);
  if (j.contains("node_limit")) {
    c.solver.node_limit = field<std::uint64_t>(j, "node_limit", w);
    if (*c.solver.node_limit == 0) throw ScenarioError("config.node_limit must be positive");
  }
  c.solver.model_improving = optional_field<bool>(j, "model_improving", c.solver.model_improving, w);
  c.solver.bound_tightening = optional_field<bool>(j, "bound_tightening", c.solver.bound_tightening, w);
  c.solver.check.strict_capacity = optional_field<bool>(j, "strict_capacity", false, w);
  c.seed = optional_field<std::uint64_t>(j, "seed", c.seed, w);
  c.solver.seed = c.seed;
  c.stall_timeout = optional_field<int>(j, "stall_timeout", c.stall_timeout, w);
  if (j.contains("bands")) {
    const json b = j.at("bands");
    const std::string wb = "config.bands";
    c.bands.low_tenths = tenths(optional_field<double>(b, "low_fraction", 0.4, wb), "low_fraction");
    c.bands.high_tenths = tenths(optional_field<double>(b, "high_fraction", 0.7, wb), "high_fraction");
    c.bands.car_slot_m = optional_field<double>(b, "car_slot_m", c.bands.car_slot_m, wb);
    if (b.contains("speeds_kmh")) {
      const json s = b.at("speeds_kmh");
      c.bands = [&] {
        TrafficBands t = TrafficBands::from_kmh(field<double>(s, "low", wb + ".speeds_kmh"),
                                                field<double>(s, "medium", wb + ".speeds_kmh"),
                                                field<double>(s, "heavy", wb + ".speeds_kmh"));
        t.low_tenths = c.bands.low_tenths;
        t.high_tenths = c.bands.high_tenths;
        t.car_slot_m = c.bands.car_slot_m;
        return t;
      }();
    }
  }
  try {
    c.search.validate();
    c.solver.validate();
    c.bands.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("config: ") + e.what());
  }
  if (c.stall_timeout <= 0) throw ScenarioError("config.stall_timeout must be positive");
  return c;
}

std::vector<DemandSpec> parse_demand(const json& j) {
  std::vector<DemandSpec> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw ScenarioError("demand: expected an array");
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "demand[" + std::to_string(i) + "]";
    DemandSpec d;
    d.id = checked_id(j[i], "id", where);
    if (!ids.insert(d.id).second) throw ScenarioError(where + ": duplicate vehicle '" + d.id + "'");
    d.origin = field<std::string>(j[i], "origin", where);
    d.destination = field<std::string>(j[i], "destination", where);
    d.arrival = optional_field<int>(j[i], "arrival", 0, where);
    if (d.arrival < 0) throw ScenarioError(where + ": negative arrival");
    const auto kind = optional_field<std::string>(j[i], "kind", "controlled", where);
    if (kind == "controlled" || kind == "con") {
      d.kind = VehicleKind::controlled;
    } else if (kind == "simulated" || kind == "sim") {
      d.kind = VehicleKind::simulated;
    } else {
      throw ScenarioError(where + ": unknown kind '" + kind + "'");
    }
    d.route = optional_field<std::vector<std::string>>(j[i], "route", {}, where);
    if (!d.route.empty() && d.kind == VehicleKind::controlled) {
      throw ScenarioError(where + ": only simulated vehicles carry a fixed route");
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario: expected an object");
  Scenario s;
  s.network = parse_network(field<json>(j, "network", "scenario"));
  s.demand = parse_demand(j.contains("demand") ? j.at("demand") : json());
  s.config = parse_config(j.contains("config") ? j.at("config") : json());
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& s) {
  json net;
  net["junctions"] = s.network.junctions;
  net["streets"] = json::array();
  for (const auto& st : s.network.streets) {
    net["streets"].push_back({{"id", st.id},
                              {"from", st.from},
                              {"to", st.to},
                              {"length", st.length},
                              {"lanes", st.lanes},
                              {"usage", std::string(usage_name(st.usage))}});
  }
  net["links"] = json::array();
  for (const auto& [a, b] : s.network.links) net["links"].push_back({a, b});
  if (!s.network.rings.empty()) {
    net["roundabouts"] = json::array();
    for (const auto& r : s.network.rings) net["roundabouts"].push_back({{"id", r.id}, {"ring", r.ring}});
  }
  json demand = json::array();
  for (const auto& d : s.demand) {
    json e = {{"id", d.id},
              {"origin", d.origin},
              {"destination", d.destination},
              {"arrival", d.arrival},
              {"kind", d.kind == VehicleKind::controlled ? "controlled" : "simulated"}};
    if (!d.route.empty()) e["route"] = d.route;
    demand.push_back(std::move(e));
  }
  const auto& c = s.config;
  // km/h -> m/s -> km/h picks up float noise; nine decimals are plenty
  auto kmh = [&](Band b) { return std::round(c.bands.speed_kmh(b) * 1e9) / 1e9; };
  json config = {{"quantum", c.quantum},
                 {"route_limit", c.search.route_limit},
                 {"similarity_threshold", c.search.similarity_threshold},
                 {"top_k", c.search.top_k},
                 {"time_limit", c.solver.time_limit},
                 {"model_improving", c.solver.model_improving},
                 {"bound_tightening", c.solver.bound_tightening},
                 {"strict_capacity", c.solver.check.strict_capacity},
                 {"seed", c.seed},
                 {"stall_timeout", c.stall_timeout},
                 {"bands",
                  {{"low_fraction", c.bands.low_tenths / 10.0},
                   {"high_fraction", c.bands.high_tenths / 10.0},
                   {"car_slot_m", c.bands.car_slot_m},
                   {"speeds_kmh",
                    {{"low", kmh(Band::low)},
                     {"medium", kmh(Band::medium)},
                     {"heavy", kmh(Band::heavy)}}}}}};
  if (c.solver.node_limit) config["node_limit"] = *c.solver.node_limit;
  json out = {{"network", net}, {"demand", demand}, {"config", config}};
  return out.dump(2) + "\n";
}

std::vector<Demand> resolve_demand(const Scenario& scenario, const Simplified& simplified) {
  const Network& net = simplified.network;
  std::unordered_map<std::string, std::string> ring_of;
  for (const auto& r : scenario.network.rings) {
    for (const auto& s : r.ring) ring_of[s] = r.id;
  }
  auto map_street = [&](const std::string& vehicle, const std::string& id) -> StreetId {
    if (ring_of.count(id)) {
      throw ScenarioError("vehicle " + vehicle + ": '" + id + "' is a roundabout ring street");
    }
    auto it = simplified.report.id_map.find(id);
    if (it == simplified.report.id_map.end()) {
      throw ScenarioError("vehicle " + vehicle + ": street '" + id + "' is unknown or not drivable");
    }
    return net.at(it->second);
  };

  std::vector<Demand> out;
  for (const auto& d : scenario.demand) {
    Demand r;
    r.id = d.id;
    r.arrival = d.arrival;
    r.kind = d.kind;
    r.origin = map_street(d.id, d.origin);
    r.destination = map_street(d.id, d.destination);
    for (std::size_t i = 0; i < d.route.size(); ++i) {
      StreetId s;
      if (ring_of.count(d.route[i])) {
        // a run of ring streets between an entry and an exit
        std::size_t j = i;
        while (j < d.route.size() && ring_of.count(d.route[j])) ++j;
        if (i == 0 || j == d.route.size()) {
          throw ScenarioError("vehicle " + d.id + ": route starts or ends inside a roundabout");
        }
        const std::string name = ring_of.at(d.route[i]) + "__" + d.route[i - 1] + "__" + d.route[j];
        auto found = net.find(name);
        if (!found) throw ScenarioError("vehicle " + d.id + ": no roundabout passage " + name);
        s = *found;
        i = j - 1;
      } else {
        s = map_street(d.id, d.route[i]);
      }
      if (r.route.empty() || r.route.back() != s) r.route.push_back(s);
    }
    if (!r.route.empty()) {
      if (r.route.front() != r.origin || r.route.back() != r.destination) {
        throw ScenarioError("vehicle " + d.id + ": route does not run from origin to destination");
      }
      Route probe{d.id, r.route, route_length(net, r.route)};
      if (auto why = check_route(net, probe); !why.empty()) throw ScenarioError("vehicle " + d.id + ": " + why);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tdist
