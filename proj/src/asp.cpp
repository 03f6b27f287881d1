#include "tdist/asp.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tdist {

namespace {

std::string atom(std::string_view pred, std::initializer_list<std::string> args) {
  std::string s(pred);
  s += '(';
  bool first = true;
  for (const auto& a : args) {
    if (!first) s += ',';
    s += a;
    first = false;
  }
  s += ").\n";
  return s;
}

std::string num(long long v) { return std::to_string(v); }

}  // namespace

std::string export_asp_facts(const Instance& inst) {
  const Network& net = *inst.network;
  std::set<StreetId> used;
  for (const auto& v : inst.vehicles) {
    for (const auto& c : v.candidates) used.insert(c.route.streets.begin(), c.route.streets.end());
  }

  std::ostringstream out;
  if (!used.empty()) out << "% trafficThreshold bounds are scaled by 10: compare against 10*N\n";
  for (int t = 0; t <= inst.horizon; ++t) out << atom("time", {num(t)});

  std::set<std::size_t> rings;
  for (StreetId s : used) {
    const auto& street = net.street(s);
    const auto& m = inst.model(s);
    const long long heavy_max = 10LL * (m.capacity + static_cast<long long>(inst.vehicles.size()));
    out << atom("capacity", {street.name, num(m.capacity)});
    for (Band b : kBands) {
      out << atom("trafficTravelTime", {std::string(band_name(b)), street.name, num(m.travel[static_cast<std::size_t>(b)])});
    }
    out << atom("maxTrafficTravelTime", {street.name, num(m.max_travel)});
    out << atom("trafficThreshold", {"low", street.name, "0", num(m.low_below)});
    out << atom("trafficThreshold", {"medium", street.name, num(m.low_below), num(m.heavy_from)});
    out << atom("trafficThreshold", {"heavy", street.name, num(m.heavy_from), num(heavy_max)});
    if (street.roundabout) rings.insert(*street.roundabout);
  }
  for (StreetId s : used) {
    for (StreetId t : net.successors(s)) {
      if (used.count(t)) out << atom("link", {net.street(s).name, net.street(t).name});
    }
  }
  for (std::size_t r : rings) {
    const auto& ra = net.roundabouts()[r];
    out << atom("roundabout", {ra.name, num(ra.capacity)});
    for (StreetId m : ra.members) {
      if (used.count(m)) out << atom("streetInRoundabout", {net.street(m).name, ra.name});
    }
  }
  for (const auto& v : inst.vehicles) {
    out << atom("vehicle", {v.id, std::string(kind_name(v.kind))});
    out << atom("origin", {v.id, net.street(v.origin).name});
    out << atom("destination", {v.id, net.street(v.destination).name});
    for (const auto& c : v.candidates) {
      out << atom("possibleRouteOfVehicle", {v.id, c.route.id});
      for (std::size_t k = 0; k < c.route.streets.size(); ++k) {
        out << atom("streetOnRoute",
                    {net.street(c.route.streets[k]).name, c.route.id, num(c.bounds.min_enter[k]), num(c.bounds.max_enter[k])});
      }
    }
    if (v.fixed) {
      const auto& streets = v.candidates.front().route.streets;
      for (std::size_t k = 0; k < streets.size(); ++k) {
        out << atom("enter", {v.id, net.street(streets[k]).name, num(v.fixed->enter[k])});
        out << atom("exit", {v.id, net.street(streets[k]).name, num(v.fixed->exit[k])});
      }
    }
  }
  return out.str();
}

std::string render_model(const Instance& inst, const Schedule& schedule) {
  const Network& net = *inst.network;
  std::ostringstream out;
  for (const auto& plan : schedule) {
    out << atom("solutionRoute", {plan.vehicle, plan.route});
    for (const auto& v : plan.visits) {
      out << atom("enter", {plan.vehicle, net.street(v.street).name, num(v.enter)});
      out << atom("exit", {plan.vehicle, net.street(v.street).name, num(v.exit)});
    }
  }
  return out.str();
}

namespace {

struct Atom {
  std::string pred;
  std::vector<std::string> args;
  std::size_t line = 0;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Atom> parse_atoms(std::string_view text) {
  std::vector<Atom> atoms;
  std::size_t i = 0;
  std::size_t line = 1;
  auto fail = [&](const std::string& why) { throw ParseError("line " + std::to_string(line) + ": " + why); };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == '.') {
      ++i;
    } else if (c == '%') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      Atom a;
      a.line = line;
      const std::size_t start = i;
      while (i < text.size() && ident_char(text[i])) ++i;
      a.pred = std::string(text.substr(start, i - start));
      if (i < text.size() && text[i] == '(') {
        ++i;
        std::string arg;
        bool closed = false;
        while (i < text.size()) {
          const char d = text[i++];
          if (d == ')' || d == ',') {
            std::size_t b = arg.find_first_not_of(" \t");
            std::size_t e = arg.find_last_not_of(" \t");
            if (b == std::string::npos) fail("empty argument in " + a.pred);
            a.args.push_back(arg.substr(b, e - b + 1));
            arg.clear();
            if (d == ')') {
              closed = true;
              break;
            }
          } else if (d == '(' || d == '\n') {
            fail("malformed atom " + a.pred);
          } else {
            arg += d;
          }
        }
        if (!closed) fail("unterminated atom " + a.pred);
        for (const auto& arg : a.args) {
          if (!std::all_of(arg.begin(), arg.end(), ident_char)) fail("bad term '" + arg + "' in " + a.pred);
        }
      }
      atoms.push_back(std::move(a));
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
  }
  return atoms;
}

int parse_step(const Atom& a, const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) {
    throw ParseError("line " + std::to_string(a.line) + ": time '" + s + "' in " + a.pred + " is not a non-negative integer");
  }
  return v;
}

}  // namespace

Schedule import_asp_model(std::string_view text, const Instance& inst) {
  const Network& net = *inst.network;
  std::unordered_map<std::string, std::size_t> vehicle_index;
  for (std::size_t i = 0; i < inst.vehicles.size(); ++i) vehicle_index.emplace(inst.vehicles[i].id, i);

  std::vector<std::optional<std::size_t>> route(inst.vehicles.size());
  std::vector<std::map<StreetId, int>> enter(inst.vehicles.size()), exit(inst.vehicles.size());

  for (const Atom& a : parse_atoms(text)) {
    const bool is_route = a.pred == "solutionRoute";
    const bool is_time = a.pred == "enter" || a.pred == "exit";
    if (!is_route && !is_time) continue;
    const std::size_t arity = is_route ? 2 : 3;
    const std::string where = "line " + std::to_string(a.line) + ": ";
    if (a.args.size() != arity) throw ParseError(where + a.pred + " takes " + std::to_string(arity) + " arguments");
    auto vit = vehicle_index.find(a.args[0]);
    if (vit == vehicle_index.end()) throw ParseError(where + "unknown vehicle '" + a.args[0] + "'");
    const std::size_t v = vit->second;
    const Vehicle& veh = inst.vehicles[v];
    if (is_route) {
      auto c = find_candidate(veh, a.args[1]);
      if (!c) throw ParseError(where + "'" + a.args[1] + "' is not a route of " + veh.id);
      if (route[v] && *route[v] != *c) throw ParseError(where + veh.id + " has two routes");
      route[v] = c;
      continue;
    }
    auto s = net.find(a.args[1]);
    if (!s) throw ParseError(where + "unknown street '" + a.args[1] + "'");
    const int t = parse_step(a, a.args[2]);
    auto& table = a.pred == "enter" ? enter[v] : exit[v];
    auto [it, fresh] = table.emplace(*s, t);
    if (!fresh && it->second != t) throw ParseError(where + veh.id + " has two " + a.pred + " times on " + a.args[1]);
  }

  Schedule schedule;
  for (std::size_t v = 0; v < inst.vehicles.size(); ++v) {
    const Vehicle& veh = inst.vehicles[v];
    if (!route[v]) throw IncompleteModel("vehicle " + veh.id + " has no route");
    const Route& r = veh.candidates[*route[v]].route;
    VehiclePlan plan{veh.id, r.id, {}};
    for (StreetId s : r.streets) {
      auto e = enter[v].find(s);
      auto x = exit[v].find(s);
      if (e == enter[v].end() || x == exit[v].end()) {
        throw IncompleteModel("vehicle " + veh.id + " lacks times on " + net.street(s).name);
      }
      plan.visits.push_back({s, e->second, x->second});
    }
    for (const auto* table : {&enter[v], &exit[v]}) {
      for (const auto& [s, t] : *table) {
        if (std::find(r.streets.begin(), r.streets.end(), s) == r.streets.end()) {
          throw ParseError("vehicle " + veh.id + " has times on " + net.street(s).name + ", which is not on " + r.id);
        }
      }
    }
    schedule.push_back(std::move(plan));
  }
  return schedule;
}

}  // namespace tdist
