#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tdist/net.hpp"
#include "tdist/routes.hpp"

namespace tdist {

enum class VehicleKind { controlled, simulated };

std::string_view kind_name(VehicleKind k) noexcept;

struct Candidate {
  Route route;
  RouteBounds bounds;
};

/// Committed enter/exit steps of a simulated vehicle, aligned with its route.
struct FixedTimes {
  std::vector<int> enter;
  std::vector<int> exit;
};

struct Vehicle {
  std::string id;
  VehicleKind kind = VehicleKind::controlled;
  StreetId origin{};
  StreetId destination{};
  std::vector<Candidate> candidates;
  std::optional<FixedTimes> fixed;

  bool controlled() const noexcept { return kind == VehicleKind::controlled; }
};

/// Per-street tables of the optimisation model.
struct StreetModel {
  int capacity = 0;
  std::array<int, 3> travel{};  ///< steps per band
  int max_travel = 0;           ///< steps to clear the street at heavy congestion
  /// Band thresholds scaled by 10: a street is `low` while 10*N < low_below,
  /// `heavy` once 10*N >= heavy_from, `medium` in between.
  int low_below = 0;
  int heavy_from = 0;
};

class InconsistentBounds : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Instance {
  std::shared_ptr<const Network> network;
  TrafficBands bands;
  int quantum = 5;
  int horizon = 0;
  std::vector<StreetModel> streets;  ///< indexed by StreetId
  std::vector<Vehicle> vehicles;

  const StreetModel& model(StreetId s) const { return streets.at(idx(s)); }
  Band band(StreetId s, int occupancy) const;
  int travel(StreetId s, int occupancy) const { return model(s).travel[static_cast<std::size_t>(band(s, occupancy))]; }
  int roundabout_capacity(std::size_t r) const { return network->roundabouts()[r].capacity; }
  std::optional<std::size_t> roundabout_of(StreetId s) const { return network->street(s).roundabout; }
};

/// Builds the model tables and validates every candidate (route continuity,
/// origin/destination, RouteBounds invariants, simulated vehicles carry one
/// candidate plus fixed times). Throws InconsistentBounds.
Instance build_instance(std::shared_ptr<const Network> network, std::vector<Vehicle> vehicles, int quantum,
                        const TrafficBands& bands = {});

struct StreetVisit {
  StreetId street{};
  int enter = 0;
  int exit = 0;

  friend bool operator==(const StreetVisit&, const StreetVisit&) = default;
};

struct VehiclePlan {
  std::string vehicle;
  std::string route;
  std::vector<StreetVisit> visits;  ///< in route order

  friend bool operator==(const VehiclePlan&, const VehiclePlan&) = default;
};

/// One plan per instance vehicle, in instance order.
using Schedule = std::vector<VehiclePlan>;

/// Vehicles on `street` at step `t`: entered at or before t and not yet exited.
int occupancy(const Schedule& schedule, StreetId street, int t);

/// Rule of the encoding a violation belongs to.
enum class Rule { shape, r1, r2, r3, r4, r5, r10, r11, r12, r13 };

std::string_view rule_name(Rule r) noexcept;

struct Violation {
  Rule rule = Rule::shape;
  std::string vehicle;
  std::optional<StreetId> street;
  std::optional<int> step;
  std::string detail;
};

struct CheckOptions {
  /// Apply the street-capacity constraint to every vehicle's enter events,
  /// not only controlled ones.
  bool strict_capacity = false;
};

/// Every broken rule instance; empty iff the schedule is feasible.
std::vector<Violation> check_schedule(const Instance& instance, const Schedule& schedule,
                                      const CheckOptions& options = {});

struct ObjectiveVector {
  long long level2 = 0;  ///< occupancy summed over distinct (street, step) enter events
  long long level1 = 0;  ///< destination exit steps summed over vehicles

  friend auto operator<=>(const ObjectiveVector&, const ObjectiveVector&) = default;
};

std::string to_string(const ObjectiveVector& o);

ObjectiveVector objective(const Instance& instance, const Schedule& schedule);

/// Index of the candidate whose route id is `route`, if any.
std::optional<std::size_t> find_candidate(const Vehicle& vehicle, std::string_view route);

}  // namespace tdist
