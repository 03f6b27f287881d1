#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdist/net.hpp"

namespace tdist {

enum class Usage { general, restricted, no_traffic };

std::string_view usage_name(Usage u) noexcept;
std::optional<Usage> parse_usage(std::string_view s) noexcept;

struct RawStreet {
  std::string id;
  std::string from;
  std::string to;
  double length = 0.0;
  int lanes = 1;
  Usage usage = Usage::general;
  /// Original street ids folded into this one; empty means "just itself".
  std::vector<std::string> sources;
  /// Set on synthetic streets produced by roundabout consolidation.
  std::optional<std::string> roundabout;
};

/// A roundabout annotation: the small streets forming its ring. Entries and
/// exits are the non-ring streets touching ring junctions.
struct RoundaboutRing {
  std::string id;
  std::vector<std::string> ring;
};

/// Shared capacity budget of a consolidated roundabout.
struct RoundaboutBudget {
  std::string id;
  int capacity = 0;
};

struct RawNetwork {
  std::vector<std::string> junctions;
  std::vector<RawStreet> streets;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<RoundaboutRing> rings;
  std::vector<RoundaboutBudget> budgets;

  const RawStreet* find(std::string_view id) const;
};

class PrepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class EmptyNetwork : public PrepError {
 public:
  using PrepError::PrepError;
};
class MalformedRoundabout : public PrepError {
 public:
  using PrepError::PrepError;
};

struct PrepReport {
  std::size_t removed_streets = 0;
  std::size_t merged_chains = 0;
  std::map<std::string, std::size_t> roundabout_expansions;
  /// Original street id -> simplified street id, for every original street
  /// that survives as (part of) an ordinary street.
  std::map<std::string, std::string> id_map;
  std::size_t merge_passes = 0;
};

/// Throws PrepError naming the first defect: undeclared junction, duplicate
/// id, dangling or discontinuous link, unknown ring street.
void validate(const RawNetwork& raw);

/// Links between every pair of consecutive streets, except immediate U-turns.
std::vector<std::pair<std::string, std::string>> derive_links(const std::vector<RawStreet>& streets);

/// Drops restricted and no-traffic streets with their links.
/// Throws EmptyNetwork when nothing drivable is left.
RawNetwork prune_non_drivable(const RawNetwork& raw, std::size_t* removed = nullptr);

/// Replaces every annotated ring with one street per reachable entry/exit
/// combination, tagged with the roundabout id. The roundabout's capacity is the
/// sum of the ring segments' capacities. Throws MalformedRoundabout.
RawNetwork consolidate_roundabouts(const RawNetwork& raw, const TrafficBands& bands,
                                   std::map<std::string, std::size_t>* expansions = nullptr);

/// Collapses junctions with exactly one incoming and one outgoing street (and a
/// link between them) until none is left. Roundabout streets are never merged.
RawNetwork merge_degree_two(const RawNetwork& raw, std::size_t* passes = nullptr);

/// Freezes a preprocessed raw network into the immutable model.
Network to_network(const RawNetwork& raw);

struct Simplified {
  Network network;
  PrepReport report;
};

/// prune -> consolidate roundabouts -> merge degree-two junctions -> freeze.
Simplified simplify(const RawNetwork& raw, const TrafficBands& bands);

/// Picks the quantum whose discretised free-flow time over the probe routes is
/// closest to the continuous time (total absolute error). Ties go to the larger quantum.
int choose_quantum(const Network& network, const std::vector<int>& candidates,
                   const std::vector<std::vector<StreetId>>& probe_routes, const TrafficBands& bands);

/// Total absolute discretisation error of `quantum` over the probe routes, in seconds.
double discretisation_error(const Network& network, int quantum,
                            const std::vector<std::vector<StreetId>>& probe_routes,
                            const TrafficBands& bands);

}  // namespace tdist
