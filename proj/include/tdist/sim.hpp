#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdist/net.hpp"
#include "tdist/routes.hpp"
#include "tdist/scenario.hpp"
#include "tdist/schedule.hpp"
#include "tdist/solver.hpp"

namespace tdist {

/// No vehicle moved, entered or left for the configured number of seconds
/// while vehicles were still waiting (gridlock).
class Stalled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyKind { optimized, shortest };

std::string_view policy_name(PolicyKind p) noexcept;

struct Policy {
  PolicyKind kind = PolicyKind::optimized;
  SearchConfig search;
  SolverConfig solver;
  int quantum = 5;  ///< optimiser step in seconds
};

/// The six indicators of the comparison table, in its row order.
struct KpiReport {
  double total_duration = 0;    ///< s, second the last vehicle left
  double avg_route_length = 0;  ///< m
  double avg_speed = 0;         ///< m/s, mean of route length / duration
  double avg_duration = 0;      ///< s, leave - network entry
  double avg_waiting_time = 0;  ///< s, seconds spent ready to move but queued
  double avg_depart_delay = 0;  ///< s, network entry - requested entry

  friend bool operator==(const KpiReport&, const KpiReport&) = default;
};

/// (row name, value) in table order.
std::vector<std::pair<std::string, double>> kpi_rows(const KpiReport& kpi);

/// Field-wise mean; all zero for an empty span.
KpiReport average(std::span<const KpiReport> runs);

enum class EventKind { arrive, depart, enter, exit, leave };

std::string_view event_name(EventKind k) noexcept;

struct Event {
  int second = 0;
  EventKind kind = EventKind::arrive;
  std::string vehicle;
  StreetId street{};
};

/// One line per event: `<second> <kind> <vehicle> <street>`.
std::string format_events(const Network& network, std::span<const Event> events);

struct Traversal {
  StreetId street{};
  int enter = 0;
  int exit = 0;
};

struct VehicleRecord {
  std::string id;
  VehicleKind kind = VehicleKind::controlled;
  int requested = 0;
  std::optional<int> entered;  ///< second the vehicle entered its origin
  std::optional<int> left;     ///< second it left its destination
  std::vector<StreetId> route;  ///< committed route
  double route_length = 0;
  std::vector<Traversal> log;
  int waiting = 0;
};

/// One invocation of the optimiser by the controller.
struct ControllerCall {
  int second = 0;
  std::size_t controlled = 0;
  std::size_t simulated = 0;
  std::size_t max_candidates = 0;
  SolveStatus status = SolveStatus::infeasible;
  ObjectiveVector objective;
  double elapsed = 0;
  bool fallback = false;  ///< no schedule came back: shortest routes were committed
  /// Set when auditing: the returned schedule, rendered as answer-set atoms and
  /// read back, passes the checker.
  std::optional<bool> audit_ok;
};

struct SimOptions {
  std::uint64_t seed = 0;
  int stall_timeout = 600;
  /// Re-check every returned schedule through the model text format.
  bool audit = false;
  /// Called with every instance the controller solves and its result.
  std::function<void(const Instance&, const SolveResult&)> on_solve;
};

struct RunResult {
  KpiReport kpi;
  std::vector<Event> events;
  std::vector<VehicleRecord> vehicles;  ///< demand order
  std::vector<ControllerCall> calls;
  std::size_t admitted = 0;
  std::size_t departed = 0;
  std::size_t peak_in_network = 0;
  bool capacity_safe = true;  ///< no street or roundabout ever held more than its capacity
  bool conserved = true;      ///< admitted == departed + in network after every tick
};

/// Mesoscopic 1-second simulator with a rolling-horizon controller.
///
/// Every street is a FIFO queue bounded by its capacity (roundabout streets
/// also share their roundabout's budget). A vehicle entering a street gets an
/// earliest exit of now + length / speed, the speed being that of the band at
/// the street's occupancy including itself; it leaves at the first tick at or
/// after that time when it heads its queue and the next street has room.
/// Arrivals enter their origin in demand order once it has room; all vehicles
/// admitted in the same second form one controller batch.
class Simulator {
 public:
  Simulator(std::shared_ptr<const Network> network, TrafficBands bands, Policy policy, SimOptions options = {});

  /// Queues arrivals; they are admitted in the order given among equal seconds.
  void add_demand(std::span<const Demand> demand);

  /// Seeds a vehicle already travelling `route`, sitting on `route[at]` as if
  /// it had entered that street now. It is never re-routed.
  void place(const std::string& id, std::vector<StreetId> route, std::size_t at = 0);

  /// Routes the controller would assign to `batch` standing at their origins
  /// now. Nothing is committed.
  std::vector<std::vector<StreetId>> on_arrival(std::span<const Demand> batch);

  /// The optimisation instance of `batch` standing at their origins now: every
  /// vehicle already in the network with a committed route becomes simulated,
  /// with its remaining route re-zeroed to the current second; the batch
  /// vehicles follow, controlled, in the order given.
  Instance arrival_instance(std::span<const Demand> batch);

  /// Advances one second: moves, waiting accounting, admissions.
  /// Throws Stalled when nothing has happened for the stall timeout.
  void step();

  /// Steps until every queued arrival has left. Idle stretches with an empty
  /// network jump straight to the next arrival.
  void run();

  bool finished() const noexcept;
  int clock() const noexcept { return clock_; }
  int occupancy(StreetId s) const { return static_cast<int>(queues_.at(idx(s)).size()); }
  std::size_t in_network() const noexcept { return in_network_; }

  /// Snapshot of records, events and KPIs so far.
  RunResult result() const;

 private:
  struct Live {
    std::size_t pos = 0;                 ///< index into the committed route
    double earliest_exit = 0;            ///< seconds
    std::vector<int> planned_steps;      ///< expected steps per route street
  };

  bool has_room(StreetId s) const;
  void enter_street(std::size_t v, StreetId s);
  void log(EventKind kind, std::size_t v, StreetId s);
  const std::vector<Route>& candidates(StreetId origin, StreetId dest);
  std::vector<int> low_band_steps(const std::vector<StreetId>& route) const;
  /// Routes and planned steps for a batch of vehicles at their origins.
  std::vector<std::pair<std::vector<StreetId>, std::vector<int>>> route_batch(std::span<const Demand> batch,
                                                                             bool record);
  void check_invariants();

  std::shared_ptr<const Network> net_;
  TrafficBands bands_;
  Policy policy_;
  SimOptions options_;
  std::vector<int> capacity_;
  std::vector<StreetId> order_;  ///< street processing order within a tick

  int clock_ = 0;
  int last_event_ = 0;
  std::vector<std::deque<std::size_t>> queues_;
  std::vector<int> roundabout_load_;
  std::vector<VehicleRecord> records_;
  std::vector<Live> live_;
  std::vector<Demand> demand_;                ///< per record
  std::vector<bool> announced_;               ///< per record: arrive event logged
  std::deque<std::size_t> pending_;           ///< record indices in arrival order
  std::vector<Event> events_;
  std::vector<ControllerCall> calls_;
  std::map<std::pair<StreetId, StreetId>, std::vector<Route>> route_cache_;
  std::size_t admitted_ = 0;
  std::size_t departed_ = 0;
  std::size_t in_network_ = 0;
  std::size_t peak_ = 0;
  bool capacity_safe_ = true;
  bool conserved_ = true;
};

/// Simulates `demand` to completion under `policy`.
RunResult run_scenario(std::shared_ptr<const Network> network, std::span<const Demand> demand, const Policy& policy,
                       const TrafficBands& bands, const SimOptions& options = {});

/// KPIs of finished vehicle records (all zero when there are none).
KpiReport compute_kpis(std::span<const VehicleRecord> vehicles);

}  // namespace tdist
