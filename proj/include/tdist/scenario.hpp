#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdist/prep.hpp"
#include "tdist/routes.hpp"
#include "tdist/schedule.hpp"
#include "tdist/solver.hpp"

namespace tdist {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DemandSpec {
  std::string id;
  std::string origin;       ///< original street id
  std::string destination;  ///< original street id
  int arrival = 0;          ///< requested entry second
  VehicleKind kind = VehicleKind::controlled;
  /// Fixed route (original street ids) for background traffic; a simulated
  /// vehicle without one follows its shortest route.
  std::vector<std::string> route;
};

struct ScenarioConfig {
  int quantum = 5;
  SearchConfig search;
  SolverConfig solver;
  TrafficBands bands;
  std::uint64_t seed = 0;
  int stall_timeout = 600;  ///< seconds without any event before a run is declared stalled
};

struct Scenario {
  RawNetwork network;
  std::vector<DemandSpec> demand;
  ScenarioConfig config;
};

/// Parses the JSON scenario format (see README). Throws ScenarioError with the
/// offending field on any schema or id problem; network-level defects are left
/// to prep's validate().
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);

/// Identifier rule shared by every id in the file: a lowercase letter followed
/// by lowercase letters, digits or single underscores.
bool valid_id(std::string_view id) noexcept;

/// A demand entry resolved against the simplified network.
struct Demand {
  std::string id;
  StreetId origin{};
  StreetId destination{};
  int arrival = 0;
  VehicleKind kind = VehicleKind::controlled;
  std::vector<StreetId> route;  ///< empty unless fixed in the scenario
};

/// Maps original street ids onto the simplified network: merged chains map to
/// the merged street, a run of ring streets to the roundabout street of its
/// entry/exit pair. Throws ScenarioError when an id has no counterpart.
std::vector<Demand> resolve_demand(const Scenario& scenario, const Simplified& simplified);

}  // namespace tdist
