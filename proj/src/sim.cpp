#include "tdist/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tdist/asp.hpp"

namespace tdist {

namespace {
constexpr double kEps = 1e-9;
}

std::string_view policy_name(PolicyKind p) noexcept {
  return p == PolicyKind::optimized ? "optimized" : "shortest";
}

std::string_view event_name(EventKind k) noexcept {
  switch (k) {
    case EventKind::arrive:
      return "arrive";
    case EventKind::depart:
      return "depart";
    case EventKind::enter:
      return "enter";
    case EventKind::exit:
      return "exit";
    case EventKind::leave:
      return "leave";
  }
  return "?";
}

std::vector<std::pair<std::string, double>> kpi_rows(const KpiReport& k) {
  return {{"Total Duration [s]", k.total_duration},   {"Avg. Route Length [m]", k.avg_route_length},
          {"Avg. Speed [m/s]", k.avg_speed},          {"Avg. Duration [s]", k.avg_duration},
          {"Avg. Waiting Time [s]", k.avg_waiting_time}, {"Avg. Depart Delay [s]", k.avg_depart_delay}};
}

KpiReport average(std::span<const KpiReport> runs) {
  KpiReport out;
  if (runs.empty()) return out;
  for (const auto& r : runs) {
    out.total_duration += r.total_duration;
    out.avg_route_length += r.avg_route_length;
    out.avg_speed += r.avg_speed;
    out.avg_duration += r.avg_duration;
    out.avg_waiting_time += r.avg_waiting_time;
    out.avg_depart_delay += r.avg_depart_delay;
  }
  const double n = static_cast<double>(runs.size());
  out.total_duration /= n;
  out.avg_route_length /= n;
  out.avg_speed /= n;
  out.avg_duration /= n;
  out.avg_waiting_time /= n;
  out.avg_depart_delay /= n;
  return out;
}

std::string format_events(const Network& network, std::span<const Event> events) {
  std::ostringstream out;
  for (const auto& e : events) {
    out << e.second << ' ' << event_name(e.kind) << ' ' << e.vehicle << ' ' << network.street(e.street).name << '\n';
  }
  return out.str();
}

KpiReport compute_kpis(std::span<const VehicleRecord> vehicles) {
  KpiReport k;
  std::size_t n = 0;
  for (const auto& v : vehicles) {
    if (!v.left || !v.entered) continue;
    ++n;
    const double duration = *v.left - *v.entered;
    k.total_duration = std::max(k.total_duration, static_cast<double>(*v.left));
    k.avg_route_length += v.route_length;
    k.avg_speed += duration > 0 ? v.route_length / duration : 0.0;
    k.avg_duration += duration;
    k.avg_waiting_time += v.waiting;
    k.avg_depart_delay += *v.entered - v.requested;
  }
  if (n == 0) return k;
  const double d = static_cast<double>(n);
  k.avg_route_length /= d;
  k.avg_speed /= d;
  k.avg_duration /= d;
  k.avg_waiting_time /= d;
  k.avg_depart_delay /= d;
  return k;
}

Simulator::Simulator(std::shared_ptr<const Network> network, TrafficBands bands, Policy policy, SimOptions options)
    : net_(std::move(network)), bands_(bands), policy_(std::move(policy)), options_(std::move(options)) {
  if (!net_) throw std::invalid_argument("simulator needs a network");
  if (policy_.quantum <= 0) throw std::invalid_argument("quantum must be positive");
  if (options_.stall_timeout <= 0) throw std::invalid_argument("stall timeout must be positive");
  bands_.validate();
  policy_.search.validate();
  policy_.solver.validate();
  const std::size_t n = net_->size();
  queues_.resize(n);
  roundabout_load_.assign(net_->roundabouts().size(), 0);
  for (const auto& s : net_->streets()) capacity_.push_back(capacity_of(s, bands_));
  for (std::size_t i = 0; i < n; ++i) order_.push_back(street_id(i));
  // the seed only decides which street moves first when two compete for a slot
  if (options_.seed != 0) {
    std::mt19937_64 rng(options_.seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

void Simulator::add_demand(std::span<const Demand> demand) {
  for (const auto& d : demand) {
    if (idx(d.origin) >= net_->size() || idx(d.destination) >= net_->size()) {
      throw std::invalid_argument("vehicle " + d.id + " refers to a street outside the network");
    }
    VehicleRecord r;
    r.id = d.id;
    r.kind = d.kind;
    r.requested = d.arrival;
    records_.push_back(std::move(r));
    live_.emplace_back();
    demand_.push_back(d);
    announced_.push_back(false);
    pending_.push_back(records_.size() - 1);
  }
  std::stable_sort(pending_.begin(), pending_.end(),
                   [&](std::size_t a, std::size_t b) { return demand_[a].arrival < demand_[b].arrival; });
}

void Simulator::place(const std::string& id, std::vector<StreetId> route, std::size_t at) {
  if (route.empty() || at >= route.size()) throw std::invalid_argument("vehicle " + id + ": bad position");
  Route probe{id, route, route_length(*net_, route)};
  if (auto why = check_route(*net_, probe); !why.empty()) throw std::invalid_argument("vehicle " + id + ": " + why);
  if (!has_room(route[at])) throw std::invalid_argument("vehicle " + id + ": street is full");
  VehicleRecord r;
  r.id = id;
  r.kind = VehicleKind::simulated;
  r.requested = clock_;
  r.entered = clock_;
  r.route = std::move(route);
  r.route_length = probe.length;
  demand_.push_back({id, r.route.front(), r.route.back(), clock_, VehicleKind::simulated, r.route});
  announced_.push_back(true);
  records_.push_back(std::move(r));
  Live l;
  l.pos = at;
  l.planned_steps = low_band_steps(records_.back().route);
  live_.push_back(std::move(l));
  const std::size_t v = records_.size() - 1;
  ++admitted_;
  ++in_network_;
  log(EventKind::depart, v, records_[v].route[at]);
  enter_street(v, records_[v].route[at]);
}

bool Simulator::has_room(StreetId s) const {
  if (queues_[idx(s)].size() >= static_cast<std::size_t>(capacity_[idx(s)])) return false;
  if (auto r = net_->street(s).roundabout) {
    return roundabout_load_[*r] < net_->roundabouts()[*r].capacity;
  }
  return true;
}

void Simulator::log(EventKind kind, std::size_t v, StreetId s) {
  events_.push_back({clock_, kind, records_[v].id, s});
  last_event_ = clock_;
}

void Simulator::enter_street(std::size_t v, StreetId s) {
  auto& q = queues_[idx(s)];
  q.push_back(v);
  if (auto r = net_->street(s).roundabout) ++roundabout_load_[*r];
  const Street& street = net_->street(s);
  const Band band = band_for(street, static_cast<int>(q.size()), bands_);
  live_[v].earliest_exit = clock_ + travel_seconds(street.length, band, bands_);
  records_[v].log.push_back({s, clock_, -1});
  log(EventKind::enter, v, s);
}

std::vector<int> Simulator::low_band_steps(const std::vector<StreetId>& route) const {
  std::vector<int> steps;
  for (StreetId s : route) steps.push_back(travel_steps(net_->street(s), Band::low, policy_.quantum, bands_));
  return steps;
}

const std::vector<Route>& Simulator::candidates(StreetId origin, StreetId dest) {
  auto key = std::make_pair(origin, dest);
  auto it = route_cache_.find(key);
  if (it != route_cache_.end()) return it->second;
  std::vector<Route> routes = policy_.kind == PolicyKind::optimized
                                  ? candidate_routes(*net_, origin, dest, policy_.search)
                                  : enumerate_routes(*net_, origin, dest, 1);
  return route_cache_.emplace(key, std::move(routes)).first->second;
}

Instance Simulator::arrival_instance(std::span<const Demand> batch) {
  const int q = policy_.quantum;
  std::unordered_set<std::string> batch_ids;
  for (const auto& d : batch) batch_ids.insert(d.id);

  // every vehicle already committed to a route becomes a simulated vehicle
  std::vector<Vehicle> vehicles;
  std::vector<Route> others;
  for (std::size_t v = 0; v < records_.size(); ++v) {
    const auto& rec = records_[v];
    if (!rec.entered || rec.left || rec.route.empty() || batch_ids.count(rec.id)) continue;
    const Live& l = live_[v];
    std::vector<StreetId> rest(rec.route.begin() + static_cast<std::ptrdiff_t>(l.pos), rec.route.end());
    FixedTimes f;
    const double remaining = (l.earliest_exit - clock_) / q;
    int t = std::max(1, static_cast<int>(std::ceil(remaining - kEps)));
    f.enter.push_back(0);
    f.exit.push_back(t);
    for (std::size_t k = l.pos + 1; k < rec.route.size(); ++k) {
      f.enter.push_back(t);
      t += std::max(1, l.planned_steps[k]);
      f.exit.push_back(t);
    }
    Route r{rec.id + "_c", rest, route_length(*net_, rest)};
    others.push_back(r);
    Vehicle sim{rec.id, VehicleKind::simulated, rest.front(), rest.back(),
                {Candidate{r, RouteBounds{f.enter, f.enter, f.exit, f.exit}}}, f};
    vehicles.push_back(std::move(sim));
  }

  std::vector<const std::vector<Route>*> cands;
  for (const auto& d : batch) cands.push_back(&candidates(d.origin, d.destination));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    // the other vehicles of the batch are assumed to take their shortest route
    std::vector<Route> context = others;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (j != i) context.push_back(cands[j]->front());
    }
    const auto congestion = congestion_counts(context);
    Vehicle v{batch[i].id, VehicleKind::controlled, batch[i].origin, batch[i].destination, {}, std::nullopt};
    for (std::size_t k = 0; k < cands[i]->size(); ++k) {
      Route r = (*cands[i])[k];
      r.id = batch[i].id + "_r" + std::to_string(k);
      // occupancy counts the vehicle itself, so the worst case does too
      auto with_self = congestion;
      for (StreetId s : r.streets) ++with_self[s];
      RouteBounds b = combine_bounds(free_flow_bounds(*net_, r, q, bands_),
                                     max_congestion_bounds(*net_, r, with_self, q, bands_));
      v.candidates.push_back({std::move(r), std::move(b)});
    }
    vehicles.push_back(std::move(v));
  }

  return build_instance(net_, std::move(vehicles), q, bands_);
}

std::vector<std::pair<std::vector<StreetId>, std::vector<int>>> Simulator::route_batch(std::span<const Demand> batch,
                                                                                       bool record) {
  std::vector<std::pair<std::vector<StreetId>, std::vector<int>>> out;
  // the first candidate is always the shortest route
  auto shortest = [&](const Demand& d) {
    const auto& r = candidates(d.origin, d.destination).front().streets;
    return std::make_pair(r, low_band_steps(r));
  };
  if (policy_.kind == PolicyKind::shortest) {
    for (const auto& d : batch) out.push_back(shortest(d));
    return out;
  }

  const Instance inst = arrival_instance(batch);
  const std::size_t first_controlled = inst.vehicles.size() - batch.size();
  std::size_t max_candidates = 0;
  for (const auto& v : inst.vehicles) max_candidates = std::max(max_candidates, v.candidates.size());
  SolverConfig cfg = policy_.solver;
  cfg.seed = options_.seed;
  const SolveResult res = solve_exact(inst, cfg);
  if (options_.on_solve) options_.on_solve(inst, res);

  ControllerCall call;
  call.second = clock_;
  call.controlled = batch.size();
  call.simulated = first_controlled;
  call.max_candidates = max_candidates;
  call.status = res.status;
  call.objective = res.objective;
  call.elapsed = res.elapsed;
  call.fallback = !res.has_schedule();
  if (options_.audit && res.has_schedule()) {
    try {
      const Schedule back = import_asp_model(render_model(inst, res.schedule), inst);
      call.audit_ok = back == res.schedule && check_schedule(inst, back, cfg.check).empty();
    } catch (const std::exception&) {
      call.audit_ok = false;
    }
  }
  if (record) calls_.push_back(call);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!res.has_schedule()) {
      out.push_back(shortest(batch[i]));
      continue;
    }
    const Vehicle& v = inst.vehicles[first_controlled + i];
    const VehiclePlan& plan = res.schedule[first_controlled + i];
    const auto c = find_candidate(v, plan.route);
    std::vector<int> steps;
    for (const auto& visit : plan.visits) steps.push_back(visit.exit - visit.enter);
    out.emplace_back(v.candidates[*c].route.streets, std::move(steps));
  }
  return out;
}

std::vector<std::vector<StreetId>> Simulator::on_arrival(std::span<const Demand> batch) {
  std::vector<std::vector<StreetId>> out;
  for (auto& [route, steps] : route_batch(batch, false)) out.push_back(std::move(route));
  return out;
}

void Simulator::step() {
  const int t = clock_;

  // moves: repeat until no queue head can advance, so a slot freed later in
  // the sweep can still be taken within the same second
  for (bool moved = true; moved;) {
    moved = false;
    for (StreetId s : order_) {
      auto& q = queues_[idx(s)];
      while (!q.empty()) {
        const std::size_t v = q.front();
        Live& l = live_[v];
        auto& rec = records_[v];
        if (l.earliest_exit > t + kEps) break;
        const bool last = l.pos + 1 == rec.route.size();
        if (!last) {
          const StreetId next = rec.route[l.pos + 1];
          const auto ra_here = net_->street(s).roundabout;
          const auto ra_next = net_->street(next).roundabout;
          const bool street_room = queues_[idx(next)].size() < static_cast<std::size_t>(capacity_[idx(next)]);
          bool ra_room = true;
          if (ra_next) {
            const int load = roundabout_load_[*ra_next] - (ra_here == ra_next ? 1 : 0);
            ra_room = load < net_->roundabouts()[*ra_next].capacity;
          }
          if (!street_room || !ra_room) break;
        }
        q.pop_front();
        if (auto r = net_->street(s).roundabout) --roundabout_load_[*r];
        rec.log.back().exit = t;
        log(EventKind::exit, v, s);
        if (last) {
          rec.left = t;
          log(EventKind::leave, v, s);
          ++departed_;
          --in_network_;
        } else {
          ++l.pos;
          enter_street(v, rec.route[l.pos]);
        }
        moved = true;
      }
    }
  }

  // waiting: ready to leave but still queued
  bool travelling = false;
  for (const auto& q : queues_) {
    for (std::size_t v : q) {
      if (live_[v].earliest_exit <= t + kEps) {
        ++records_[v].waiting;
      } else {
        travelling = true;
      }
    }
  }

  // admissions in arrival order; everything admitted now is one batch
  std::vector<std::size_t> admitted_now;
  bool blocked = false;
  for (auto it = pending_.begin(); it != pending_.end() && demand_[*it].arrival <= t;) {
    const std::size_t v = *it;
    const Demand& d = demand_[v];
    if (!announced_[v]) {
      log(EventKind::arrive, v, d.origin);
      announced_[v] = true;
    }
    if (!has_room(d.origin)) {
      blocked = true;
      ++it;
      continue;
    }
    records_[v].entered = t;
    ++admitted_;
    ++in_network_;
    log(EventKind::depart, v, d.origin);
    enter_street(v, d.origin);
    admitted_now.push_back(v);
    it = pending_.erase(it);
  }
  // fixed routes are committed first so the controller sees them as traffic
  std::vector<Demand> batch;
  for (std::size_t v : admitted_now) {
    const Demand& d = demand_[v];
    if (d.kind == VehicleKind::controlled) {
      batch.push_back(d);
      continue;
    }
    auto& rec = records_[v];
    rec.route = d.route.empty() ? candidates(d.origin, d.destination).front().streets : d.route;
    rec.route_length = route_length(*net_, rec.route);
    live_[v].planned_steps = low_band_steps(rec.route);
  }
  if (!batch.empty()) {
    auto routes = route_batch(batch, true);
    std::size_t i = 0;
    for (std::size_t v : admitted_now) {
      if (demand_[v].kind != VehicleKind::controlled) continue;
      auto& rec = records_[v];
      rec.route = std::move(routes[i].first);
      rec.route_length = route_length(*net_, rec.route);
      live_[v].planned_steps = std::move(routes[i].second);
      ++i;
    }
  }

  peak_ = std::max(peak_, in_network_);
  check_invariants();
  if ((in_network_ > 0 || blocked) && !travelling && t - last_event_ >= options_.stall_timeout) {
    throw Stalled("no vehicle moved for " + std::to_string(t - last_event_) + " s (second " + std::to_string(t) +
                  ", " + std::to_string(in_network_) + " in the network)");
  }
  ++clock_;
}

void Simulator::check_invariants() {
  std::size_t total = 0;
  std::vector<int> ra(net_->roundabouts().size(), 0);
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    const auto size = queues_[i].size();
    total += size;
    if (size > static_cast<std::size_t>(capacity_[i])) capacity_safe_ = false;
    if (auto r = net_->streets()[i].roundabout) ra[*r] += static_cast<int>(size);
  }
  for (std::size_t r = 0; r < ra.size(); ++r) {
    if (ra[r] > net_->roundabouts()[r].capacity || ra[r] != roundabout_load_[r]) capacity_safe_ = false;
  }
  if (admitted_ != departed_ + in_network_ || total != in_network_) conserved_ = false;
}

bool Simulator::finished() const noexcept { return pending_.empty() && in_network_ == 0; }

void Simulator::run() {
  while (!finished()) {
    if (in_network_ == 0 && demand_[pending_.front()].arrival > clock_) clock_ = demand_[pending_.front()].arrival;
    step();
  }
}

RunResult Simulator::result() const {
  RunResult r;
  r.kpi = compute_kpis(records_);
  r.events = events_;
  r.vehicles = records_;
  r.calls = calls_;
  r.admitted = admitted_;
  r.departed = departed_;
  r.peak_in_network = peak_;
  r.capacity_safe = capacity_safe_;
  r.conserved = conserved_ && (!finished() || in_network_ == 0);
  return r;
}

RunResult run_scenario(std::shared_ptr<const Network> network, std::span<const Demand> demand, const Policy& policy,
                       const TrafficBands& bands, const SimOptions& options) {
  Simulator sim(std::move(network), bands, policy, options);
  sim.add_demand(demand);
  sim.run();
  return sim.result();
}

}  // namespace tdist
