#include "tdist/routes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace tdist {

void SearchConfig::validate() const {
  if (top_k < 1 || route_limit < top_k) {
    throw std::invalid_argument("search config: need route limit >= top k >= 1");
  }
  if (!(similarity_threshold > 0 && similarity_threshold <= 1)) {
    throw std::invalid_argument("search config: similarity threshold must be in (0, 1]");
  }
}

double route_length(const Network& network, std::span<const StreetId> streets) {
  double total = 0.0;
  for (StreetId s : streets) total += network.street(s).length;
  return total;
}

std::string check_route(const Network& network, const Route& route) {
  if (route.streets.empty()) return "route '" + route.id + "' is empty";
  for (std::size_t i = 0; i < route.streets.size(); ++i) {
    if (idx(route.streets[i]) >= network.size()) return "route '" + route.id + "' has an unknown street";
    for (std::size_t j = 0; j < i; ++j) {
      if (route.streets[i] == route.streets[j]) {
        return "route '" + route.id + "' repeats street '" + network.street(route.streets[i]).name + "'";
      }
    }
    if (i > 0 && !network.linked(route.streets[i - 1], route.streets[i])) {
      return "route '" + route.id + "' has no link " + network.street(route.streets[i - 1]).name +
             " -> " + network.street(route.streets[i]).name;
    }
  }
  const double expected = route_length(network, route.streets);
  if (std::abs(expected - route.length) > 1e-6 * std::max(1.0, expected)) {
    return "route '" + route.id + "' length does not match its streets";
  }
  return {};
}

namespace {

using Millimetres = std::int64_t;
constexpr Millimetres kUnreachable = std::numeric_limits<Millimetres>::max() / 4;

Millimetres mm(double metres) { return std::llround(metres * 1000.0); }

// Distance from the end of each street to the end of `dest`, over street lengths.
std::vector<Millimetres> remaining_distance(const Network& network, StreetId dest) {
  std::vector<Millimetres> dist(network.size(), kUnreachable);
  using Item = std::pair<Millimetres, StreetId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[idx(dest)] = 0;
  pq.emplace(0, dest);
  while (!pq.empty()) {
    auto [d, s] = pq.top();
    pq.pop();
    if (d != dist[idx(s)]) continue;
    const Millimetres through = d + mm(network.street(s).length);
    for (StreetId p : network.predecessors(s)) {
      if (through < dist[idx(p)]) {
        dist[idx(p)] = through;
        pq.emplace(through, p);
      }
    }
  }
  return dist;
}

struct Partial {
  Millimetres key;  // length so far (+ remaining distance when guided)
  Millimetres length;
  std::vector<StreetId> streets;
};

struct PartialAfter {
  bool operator()(const Partial& a, const Partial& b) const {
    if (a.key != b.key) return a.key > b.key;
    return a.streets > b.streets;
  }
};

}  // namespace

std::vector<Route> enumerate_routes(const Network& network, StreetId origin, StreetId dest,
                                    std::size_t limit, const EnumerationOptions& options,
                                    EnumerationStats* stats) {
  const auto dist = remaining_distance(network, dest);
  if (dist[idx(origin)] >= kUnreachable) {
    throw NoRoute("no route from '" + network.street(origin).name + "' to '" +
                  network.street(dest).name + "'");
  }
  EnumerationStats local;
  std::vector<Route> routes;
  std::priority_queue<Partial, std::vector<Partial>, PartialAfter> queue;
  auto heuristic = [&](StreetId s) { return options.distance_guided ? dist[idx(s)] : 0; };

  const Millimetres first = mm(network.street(origin).length);
  queue.push({first + heuristic(origin), first, {origin}});
  while (!queue.empty() && routes.size() < limit) {
    Partial cur = queue.top();
    queue.pop();
    const StreetId last = cur.streets.back();
    if (last == dest) {
      Route r;
      r.id = "r" + std::to_string(routes.size());
      r.length = route_length(network, cur.streets);
      r.streets = std::move(cur.streets);
      routes.push_back(std::move(r));
      continue;
    }
    ++local.expanded;
    for (StreetId next : network.successors(last)) {
      if (std::find(cur.streets.begin(), cur.streets.end(), next) != cur.streets.end()) continue;
      if (dist[idx(next)] >= kUnreachable) continue;
      if (queue.size() >= options.queue_cap) {
        local.truncated = true;
        break;
      }
      Partial p;
      p.length = cur.length + mm(network.street(next).length);
      p.key = p.length + heuristic(next);
      p.streets.reserve(cur.streets.size() + 1);
      p.streets = cur.streets;
      p.streets.push_back(next);
      queue.push(std::move(p));
    }
    local.peak_queue = std::max(local.peak_queue, queue.size());
    if (local.truncated) break;
  }
  if (stats) *stats = local;
  return routes;
}

double similarity(const Route& a, const Route& b) {
  if (a.streets.empty() || b.streets.empty()) throw std::invalid_argument("similarity of an empty route");
  std::vector<StreetId> sa(a.streets);
  std::vector<StreetId> sb(b.streets);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<StreetId> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(std::min(sa.size(), sb.size()));
}

std::vector<std::vector<Route>> cluster_routes(std::span<const Route> routes, double threshold) {
  std::vector<std::vector<Route>> clusters;
  for (const auto& r : routes) {
    bool placed = false;
    for (auto& cluster : clusters) {
      const bool fits = std::all_of(cluster.begin(), cluster.end(),
                                    [&](const Route& m) { return similarity(r, m) < threshold; });
      if (fits) {
        cluster.push_back(r);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({r});
  }
  return clusters;
}

std::vector<Route> select_candidates(const std::vector<std::vector<Route>>& clusters, std::size_t top_k) {
  std::vector<Route> out;
  for (auto cluster : clusters) {
    std::stable_sort(cluster.begin(), cluster.end(),
                     [](const Route& a, const Route& b) { return a.length < b.length; });
    const std::size_t n = std::min(top_k, cluster.size());
    out.insert(out.end(), cluster.begin(), cluster.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

std::vector<Route> candidate_routes(const Network& network, StreetId origin, StreetId dest,
                                    const SearchConfig& config) {
  auto routes = enumerate_routes(network, origin, dest, config.route_limit);
  return select_candidates(cluster_routes(routes, config.similarity_threshold), config.top_k);
}

namespace {

BoundsSide cumulative(const Network& network, const Route& route, int quantum, const TrafficBands& bands,
                      const auto& band_of) {
  BoundsSide side;
  int t = 0;
  for (StreetId s : route.streets) {
    const auto& street = network.street(s);
    side.enter.push_back(t);
    t += travel_steps(street, band_of(street), quantum, bands);
    side.exit.push_back(t);
  }
  return side;
}

}  // namespace

BoundsSide free_flow_bounds(const Network& network, const Route& route, int quantum,
                            const TrafficBands& bands) {
  return cumulative(network, route, quantum, bands, [](const Street&) { return Band::low; });
}

std::unordered_map<StreetId, int> congestion_counts(std::span<const Route> routes) {
  std::unordered_map<StreetId, int> counts;
  for (const auto& r : routes) {
    for (StreetId s : r.streets) ++counts[s];
  }
  return counts;
}

BoundsSide max_congestion_bounds(const Network& network, const Route& route,
                                 const std::unordered_map<StreetId, int>& congestion, int quantum,
                                 const TrafficBands& bands) {
  return cumulative(network, route, quantum, bands, [&](const Street& street) {
    auto it = congestion.find(street.id);
    return band_for(street, it == congestion.end() ? 0 : it->second, bands);
  });
}

BoundsSide max_congestion_bounds(const Network& network, const Route& route,
                                 std::span<const Route> other_routes, int quantum,
                                 const TrafficBands& bands) {
  return max_congestion_bounds(network, route, congestion_counts(other_routes), quantum, bands);
}

RouteBounds combine_bounds(const BoundsSide& min_side, const BoundsSide& max_side) {
  return RouteBounds{min_side.enter, max_side.enter, min_side.exit, max_side.exit};
}

std::string check_bounds(const RouteBounds& b) {
  const std::size_t n = b.min_enter.size();
  if (n == 0) return "bounds are empty";
  if (b.max_enter.size() != n || b.min_exit.size() != n || b.max_exit.size() != n) {
    return "bounds vectors differ in length";
  }
  if (b.min_enter[0] != 0 || b.max_enter[0] != 0) return "first street must be entered at step 0";
  for (std::size_t i = 0; i < n; ++i) {
    const std::string at = " at street #" + std::to_string(i);
    if (b.min_enter[i] < 0 || b.min_enter[i] > b.max_enter[i]) return "enter range is empty" + at;
    if (b.min_enter[i] >= b.min_exit[i]) return "min exit must follow min enter" + at;
    if (b.max_enter[i] >= b.max_exit[i]) return "max exit must follow max enter" + at;
    if (i > 0 && (b.min_enter[i] < b.min_enter[i - 1] || b.max_enter[i] < b.max_enter[i - 1] ||
                  b.min_exit[i] < b.min_exit[i - 1] || b.max_exit[i] < b.max_exit[i - 1])) {
      return "bounds decrease along the route" + at;
    }
  }
  return {};
}

}  // namespace tdist
