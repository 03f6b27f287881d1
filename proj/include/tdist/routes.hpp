#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdist/net.hpp"

namespace tdist {

struct Route {
  std::string id;
  std::vector<StreetId> streets;
  double length = 0.0;

  friend bool operator==(const Route&, const Route&) = default;
};

/// Per-street step bounds for a vehicle that starts its route at step 0.
struct RouteBounds {
  std::vector<int> min_enter;
  std::vector<int> max_enter;
  std::vector<int> min_exit;
  std::vector<int> max_exit;

  std::size_t size() const noexcept { return min_enter.size(); }
  friend bool operator==(const RouteBounds&, const RouteBounds&) = default;
};

struct SearchConfig {
  std::size_t route_limit = 60;
  double similarity_threshold = 0.5;
  std::size_t top_k = 5;

  void validate() const;
};

class NoRoute : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Route invariants: non-empty, no repeated street, consecutive streets linked,
/// length equal to the sum of street lengths. Returns an empty string when
/// valid, otherwise a description of the first defect.
std::string check_route(const Network& network, const Route& route);

double route_length(const Network& network, std::span<const StreetId> streets);

struct EnumerationStats {
  std::size_t expanded = 0;
  std::size_t peak_queue = 0;
  bool truncated = false;  ///< queue cap hit before `limit` routes were found
};

struct EnumerationOptions {
  std::size_t queue_cap = 1'000'000;
  /// Order partial routes by length plus the exact remaining distance to the
  /// destination. Complete routes come out in the same order as with plain
  /// length ordering; only the number of expanded partial routes changes.
  bool distance_guided = true;
};

/// Best-first enumeration of acyclic routes from `origin` to `dest` in
/// non-decreasing length, ties broken by the street-id sequence. Routes that
/// would repeat a street are discarded. Throws NoRoute if `dest` is unreachable.
std::vector<Route> enumerate_routes(const Network& network, StreetId origin, StreetId dest,
                                    std::size_t limit, const EnumerationOptions& options = {},
                                    EnumerationStats* stats = nullptr);

/// |streets(a) ∩ streets(b)| / min(|streets(a)|, |streets(b)|).
double similarity(const Route& a, const Route& b);

/// Greedy first-fit grouping in input order: a route joins the first cluster
/// in which every member is less similar than `threshold`, otherwise it
/// founds a new cluster.
std::vector<std::vector<Route>> cluster_routes(std::span<const Route> routes, double threshold);

/// The `top_k` shortest routes of every cluster, cluster by cluster.
std::vector<Route> select_candidates(const std::vector<std::vector<Route>>& clusters, std::size_t top_k);

/// enumerate -> cluster -> select, with the search configuration.
std::vector<Route> candidate_routes(const Network& network, StreetId origin, StreetId dest,
                                    const SearchConfig& config);

/// One side of RouteBounds: per-street enter and exit steps of one relaxed run.
struct BoundsSide {
  std::vector<int> enter;
  std::vector<int> exit;
};

/// Relaxed run with an empty network: every street at the low-band speed.
BoundsSide free_flow_bounds(const Network& network, const Route& route, int quantum,
                            const TrafficBands& bands);

/// Number of routes containing each street.
std::unordered_map<StreetId, int> congestion_counts(std::span<const Route> routes);

/// Relaxed run where every other vehicle sits on every street of its route at
/// once: each street is traversed at the band of that congestion.
BoundsSide max_congestion_bounds(const Network& network, const Route& route,
                                 const std::unordered_map<StreetId, int>& congestion, int quantum,
                                 const TrafficBands& bands);
BoundsSide max_congestion_bounds(const Network& network, const Route& route,
                                 std::span<const Route> other_routes, int quantum,
                                 const TrafficBands& bands);

RouteBounds combine_bounds(const BoundsSide& min_side, const BoundsSide& max_side);

/// RouteBounds invariants; returns an empty string when valid.
std::string check_bounds(const RouteBounds& bounds);

}  // namespace tdist
