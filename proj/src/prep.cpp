#include "tdist/prep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace tdist {

std::string_view usage_name(Usage u) noexcept {
  switch (u) {
    case Usage::general:
      return "general";
    case Usage::restricted:
      return "restricted";
    case Usage::no_traffic:
      return "no-traffic";
  }
  return "general";
}

std::optional<Usage> parse_usage(std::string_view s) noexcept {
  if (s == "general") return Usage::general;
  if (s == "restricted") return Usage::restricted;
  if (s == "no-traffic" || s == "no_traffic") return Usage::no_traffic;
  return std::nullopt;
}

const RawStreet* RawNetwork::find(std::string_view id) const {
  for (const auto& s : streets) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

namespace {

using StreetIndex = std::unordered_map<std::string, const RawStreet*>;

StreetIndex index_streets(const RawNetwork& raw) {
  StreetIndex m;
  for (const auto& s : raw.streets) m.emplace(s.id, &s);
  return m;
}

std::vector<std::string> sources_of(const RawStreet& s) {
  return s.sources.empty() ? std::vector<std::string>{s.id} : s.sources;
}

void drop_links_touching(RawNetwork& net, const std::unordered_set<std::string>& gone) {
  std::erase_if(net.links, [&](const auto& l) { return gone.count(l.first) || gone.count(l.second); });
}

void dedupe_links(RawNetwork& net) {
  std::sort(net.links.begin(), net.links.end());
  net.links.erase(std::unique(net.links.begin(), net.links.end()), net.links.end());
}

}  // namespace

void validate(const RawNetwork& raw) {
  std::unordered_set<std::string> junctions;
  for (const auto& j : raw.junctions) {
    if (!junctions.insert(j).second) throw PrepError("duplicate junction '" + j + "'");
  }
  StreetIndex streets;
  for (const auto& s : raw.streets) {
    if (!streets.emplace(s.id, &s).second) throw PrepError("duplicate street '" + s.id + "'");
    if (!junctions.count(s.from)) {
      throw PrepError("street '" + s.id + "' starts at undeclared junction '" + s.from + "'");
    }
    if (!junctions.count(s.to)) {
      throw PrepError("street '" + s.id + "' ends at undeclared junction '" + s.to + "'");
    }
    if (!(s.length > 0)) throw PrepError("street '" + s.id + "' has non-positive length");
    if (s.lanes < 1) throw PrepError("street '" + s.id + "' has no lanes");
  }
  for (const auto& [a, b] : raw.links) {
    auto ia = streets.find(a);
    auto ib = streets.find(b);
    if (ia == streets.end() || ib == streets.end()) {
      throw PrepError("dangling link " + a + " -> " + b);
    }
    if (ia->second->to != ib->second->from) {
      throw PrepError("link " + a + " -> " + b + " does not share a junction");
    }
  }
  std::unordered_set<std::string> ring_ids;
  std::unordered_set<std::string> ring_streets;
  for (const auto& r : raw.rings) {
    if (!ring_ids.insert(r.id).second) throw PrepError("duplicate roundabout '" + r.id + "'");
    for (const auto& s : r.ring) {
      if (!streets.count(s)) throw PrepError("roundabout '" + r.id + "' lists unknown street '" + s + "'");
      if (!ring_streets.insert(s).second) {
        throw PrepError("street '" + s + "' belongs to more than one roundabout");
      }
    }
  }
}

std::vector<std::pair<std::string, std::string>> derive_links(const std::vector<RawStreet>& streets) {
  std::unordered_map<std::string, std::vector<const RawStreet*>> leaving;
  for (const auto& s : streets) leaving[s.from].push_back(&s);
  std::vector<std::pair<std::string, std::string>> links;
  for (const auto& a : streets) {
    auto it = leaving.find(a.to);
    if (it == leaving.end()) continue;
    for (const RawStreet* b : it->second) {
      if (b->id == a.id) continue;
      if (b->to == a.from && b->from == a.to) continue;  // U-turn
      links.emplace_back(a.id, b->id);
    }
  }
  std::sort(links.begin(), links.end());
  return links;
}

RawNetwork prune_non_drivable(const RawNetwork& raw, std::size_t* removed) {
  RawNetwork out;
  out.junctions = raw.junctions;
  out.budgets = raw.budgets;
  std::unordered_set<std::string> gone;
  for (const auto& s : raw.streets) {
    if (s.usage == Usage::general) {
      out.streets.push_back(s);
    } else {
      gone.insert(s.id);
    }
  }
  if (out.streets.empty()) throw EmptyNetwork("no drivable street left after pruning");
  out.links = raw.links;
  drop_links_touching(out, gone);
  for (auto r : raw.rings) {
    std::erase_if(r.ring, [&](const std::string& s) { return gone.count(s) > 0; });
    out.rings.push_back(std::move(r));
  }
  if (removed) *removed = gone.size();
  return out;
}

RawNetwork consolidate_roundabouts(const RawNetwork& raw, const TrafficBands& bands,
                                   std::map<std::string, std::size_t>* expansions) {
  RawNetwork out = raw;
  out.rings.clear();

  std::unordered_set<std::string> all_ring_streets;
  for (const auto& r : raw.rings) all_ring_streets.insert(r.ring.begin(), r.ring.end());

  std::set<std::pair<std::string, std::string>> links(raw.links.begin(), raw.links.end());
  const auto streets = index_streets(raw);

  auto rings = raw.rings;
  std::sort(rings.begin(), rings.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<RawStreet> synthetic;
  std::vector<std::pair<std::string, std::string>> synthetic_links;

  for (const auto& r : rings) {
    if (r.ring.empty()) throw MalformedRoundabout("roundabout '" + r.id + "' has no ring street");
    std::map<std::string, const RawStreet*> out_of;  // junction -> ring street leaving it
    std::map<std::string, const RawStreet*> into;    // junction -> ring street entering it
    for (const auto& id : r.ring) {
      auto it = streets.find(id);
      if (it == streets.end()) {
        throw MalformedRoundabout("roundabout '" + r.id + "' lists unknown street '" + id + "'");
      }
      const RawStreet* s = it->second;
      if (!out_of.emplace(s->from, s).second || !into.emplace(s->to, s).second) {
        throw MalformedRoundabout("roundabout '" + r.id + "' is not a single directed cycle");
      }
    }
    // Walk the ring from its smallest street id; it must come back after visiting every street.
    std::vector<const RawStreet*> cycle;
    const RawStreet* start = streets.at(*std::min_element(r.ring.begin(), r.ring.end()));
    const RawStreet* cur = start;
    do {
      cycle.push_back(cur);
      auto next = out_of.find(cur->to);
      if (next == out_of.end() || cycle.size() > r.ring.size()) {
        throw MalformedRoundabout("roundabout '" + r.id + "' is not a single directed cycle");
      }
      cur = next->second;
    } while (cur != start);
    if (cycle.size() != r.ring.size()) {
      throw MalformedRoundabout("roundabout '" + r.id + "' is not a single directed cycle");
    }
    std::unordered_map<std::string, std::size_t> position;  // ring junction -> index of street leaving it
    for (std::size_t i = 0; i < cycle.size(); ++i) position[cycle[i]->from] = i;

    std::vector<const RawStreet*> entries;
    std::vector<const RawStreet*> exits;
    for (const auto& s : raw.streets) {
      if (all_ring_streets.count(s.id)) continue;
      if (position.count(s.to)) entries.push_back(&s);
      if (position.count(s.from)) exits.push_back(&s);
    }
    auto by_id = [](const RawStreet* a, const RawStreet* b) { return a->id < b->id; };
    std::sort(entries.begin(), entries.end(), by_id);
    std::sort(exits.begin(), exits.end(), by_id);

    std::size_t produced = 0;
    for (const RawStreet* e : entries) {
      const std::size_t first = position.at(e->to);
      if (!links.count({e->id, cycle[first]->id})) continue;
      for (const RawStreet* x : exits) {
        if (x->from == e->to) continue;
        const std::size_t last = (position.at(x->from) + cycle.size() - 1) % cycle.size();
        if (!links.count({cycle[last]->id, x->id})) continue;
        RawStreet syn;
        syn.id = r.id + "__" + e->id + "__" + x->id;
        syn.from = e->to;
        syn.to = x->from;
        syn.lanes = cycle[first]->lanes;
        syn.roundabout = r.id;
        for (std::size_t i = first;; i = (i + 1) % cycle.size()) {
          syn.length += cycle[i]->length;
          syn.lanes = std::min(syn.lanes, cycle[i]->lanes);
          for (auto& src : sources_of(*cycle[i])) syn.sources.push_back(std::move(src));
          if (i == last) break;
        }
        synthetic_links.emplace_back(e->id, syn.id);
        synthetic_links.emplace_back(syn.id, x->id);
        synthetic.push_back(std::move(syn));
        ++produced;
      }
    }
    if (expansions) (*expansions)[r.id] = produced;
    if (produced > 0) {
      int capacity = 0;
      for (const RawStreet* s : cycle) capacity += capacity_of(s->length, s->lanes, bands);
      out.budgets.push_back({r.id, capacity});
    }
  }

  std::erase_if(out.streets, [&](const RawStreet& s) { return all_ring_streets.count(s.id) > 0; });
  drop_links_touching(out, all_ring_streets);
  for (auto& s : synthetic) out.streets.push_back(std::move(s));
  out.links.insert(out.links.end(), synthetic_links.begin(), synthetic_links.end());
  dedupe_links(out);
  return out;
}

RawNetwork merge_degree_two(const RawNetwork& raw, std::size_t* passes) {
  RawNetwork net = raw;
  for (auto& s : net.streets) s.sources = sources_of(s);
  std::size_t pass_count = 0;

  for (;;) {
    std::map<std::string, std::vector<std::size_t>> in;
    std::map<std::string, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < net.streets.size(); ++i) {
      in[net.streets[i].to].push_back(i);
      out[net.streets[i].from].push_back(i);
    }
    std::set<std::pair<std::string, std::string>> links(net.links.begin(), net.links.end());

    std::vector<bool> touched(net.streets.size(), false);
    std::vector<bool> dead(net.streets.size(), false);
    std::unordered_set<std::string> eliminated;
    bool changed = false;

    auto junctions = net.junctions;
    std::sort(junctions.begin(), junctions.end());
    for (const auto& j : junctions) {
      auto ii = in.find(j);
      auto oi = out.find(j);
      if (ii == in.end() || oi == out.end()) continue;
      if (ii->second.size() != 1 || oi->second.size() != 1) continue;
      const std::size_t ia = ii->second.front();
      const std::size_t ib = oi->second.front();
      if (ia == ib || touched[ia] || touched[ib]) continue;
      RawStreet& a = net.streets[ia];
      RawStreet& b = net.streets[ib];
      if (a.roundabout || b.roundabout) continue;
      if (!links.count({a.id, b.id})) continue;

      RawStreet merged;
      merged.id = a.id + "__" + b.id;
      merged.from = a.from;
      merged.to = b.to;
      merged.length = a.length + b.length;
      merged.lanes = std::min(a.lanes, b.lanes);
      merged.sources = a.sources;
      merged.sources.insert(merged.sources.end(), b.sources.begin(), b.sources.end());
      // `b` is dropped, `a` takes the merged identity.
      links.erase({a.id, b.id});
      std::set<std::pair<std::string, std::string>> relinked;
      for (const auto& [x, y] : links) {
        const bool from_ab = (x == a.id || x == b.id);
        const bool to_ab = (y == a.id || y == b.id);
        // Outgoing links of `a` other than a->b cannot exist (single outgoing street at j);
        // incoming links of `b` other than a->b cannot exist either.
        if (x == a.id && !to_ab) continue;
        if (y == b.id && !from_ab) continue;
        relinked.emplace(from_ab ? merged.id : x, to_ab ? merged.id : y);
      }
      links = std::move(relinked);
      a = std::move(merged);
      touched[ia] = touched[ib] = true;
      dead[ib] = true;
      eliminated.insert(j);
      changed = true;
    }
    if (!changed) break;
    ++pass_count;

    std::vector<RawStreet> kept;
    for (std::size_t i = 0; i < net.streets.size(); ++i) {
      if (!dead[i]) kept.push_back(std::move(net.streets[i]));
    }
    net.streets = std::move(kept);
    std::unordered_set<std::string> ids;
    for (const auto& s : net.streets) {
      if (!ids.insert(s.id).second) throw PrepError("merged street id '" + s.id + "' collides");
    }
    net.links.assign(links.begin(), links.end());
    std::erase_if(net.junctions, [&](const std::string& j) { return eliminated.count(j) > 0; });
  }
  if (passes) *passes = pass_count;
  return net;
}

Network to_network(const RawNetwork& raw) {
  NetworkSpec spec;
  for (const auto& s : raw.streets) {
    NetworkSpec::StreetSpec ss;
    ss.name = s.id;
    ss.from = s.from;
    ss.to = s.to;
    ss.length = s.length;
    ss.lanes = s.lanes;
    ss.drivable = s.usage == Usage::general;
    ss.roundabout = s.roundabout;
    ss.sources = sources_of(s);
    spec.streets.push_back(std::move(ss));
  }
  spec.links = raw.links;
  for (const auto& b : raw.budgets) spec.roundabouts.push_back({b.id, b.capacity});
  try {
    return Network::build(std::move(spec));
  } catch (const NetworkError& e) {
    throw PrepError(e.what());
  }
}

Simplified simplify(const RawNetwork& raw, const TrafficBands& bands) {
  validate(raw);
  PrepReport report;
  RawNetwork net = prune_non_drivable(raw, &report.removed_streets);
  net = consolidate_roundabouts(net, bands, &report.roundabout_expansions);
  net = merge_degree_two(net, &report.merge_passes);
  Network network = to_network(net);
  for (const auto& s : network.streets()) {
    if (s.roundabout) continue;
    if (s.sources.size() > 1) ++report.merged_chains;
    for (const auto& src : s.sources) report.id_map[src] = s.name;
  }
  return {std::move(network), std::move(report)};
}

double discretisation_error(const Network& network, int quantum,
                            const std::vector<std::vector<StreetId>>& probe_routes,
                            const TrafficBands& bands) {
  double error = 0.0;
  for (const auto& route : probe_routes) {
    double continuous = 0.0;
    long discrete = 0;
    for (StreetId s : route) {
      const auto& street = network.street(s);
      continuous += travel_seconds(street.length, Band::low, bands);
      discrete += static_cast<long>(travel_steps(street, Band::low, quantum, bands)) * quantum;
    }
    error += std::abs(static_cast<double>(discrete) - continuous);
  }
  return error;
}

int choose_quantum(const Network& network, const std::vector<int>& candidates,
                   const std::vector<std::vector<StreetId>>& probe_routes, const TrafficBands& bands) {
  if (candidates.empty()) throw std::invalid_argument("choose_quantum: no candidate quantum");
  int best = candidates.front();
  double best_error = discretisation_error(network, best, probe_routes, bands);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const int q = candidates[i];
    const double err = discretisation_error(network, q, probe_routes, bands);
    if (err < best_error - 1e-9 || (std::abs(err - best_error) <= 1e-9 && q > best)) {
      best = q;
      best_error = err;
    }
  }
  return best;
}

}  // namespace tdist
