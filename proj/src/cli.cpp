#include "tdist/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdist/asp.hpp"
#include "tdist/prep.hpp"
#include "tdist/scenario.hpp"
#include "tdist/sim.hpp"
#include "tdist/solver.hpp"
#include "tdist/synth.hpp"

namespace tdist {

namespace {

using nlohmann::json;

/// Everything a command needs after loading a scenario file.
struct Loaded {
  Scenario scenario;
  std::shared_ptr<const Network> network;
  PrepReport report;
  std::vector<Demand> demand;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.scenario = load_scenario(path);
  auto simplified = simplify(l.scenario.network, l.scenario.config.bands);
  l.report = simplified.report;
  l.demand = resolve_demand(l.scenario, simplified);
  l.network = std::make_shared<const Network>(std::move(simplified.network));
  return l;
}

Policy policy_of(const ScenarioConfig& c, PolicyKind kind) {
  return Policy{kind, c.search, c.solver, c.quantum};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

/// The instance of the demand's first arrival batch: vehicles with a fixed
/// route are placed on their origin as committed traffic, the controlled ones
/// become the decision vehicles.
struct FirstBatch {
  std::unique_ptr<Simulator> sim;
  Instance instance;
  int second = 0;
};

FirstBatch first_batch(const Loaded& l) {
  if (l.demand.empty()) throw ScenarioError("scenario has no demand");
  FirstBatch b;
  b.second = std::min_element(l.demand.begin(), l.demand.end(), [](const Demand& x, const Demand& y) {
               return x.arrival < y.arrival;
             })->arrival;
  b.sim = std::make_unique<Simulator>(l.network, l.scenario.config.bands,
                                      policy_of(l.scenario.config, PolicyKind::optimized));
  std::vector<Demand> controlled;
  for (const auto& d : l.demand) {
    if (d.arrival != b.second) continue;
    if (d.kind == VehicleKind::controlled) {
      controlled.push_back(d);
      continue;
    }
    auto route = d.route.empty() ? enumerate_routes(*l.network, d.origin, d.destination, 1).front().streets : d.route;
    b.sim->place(d.id, std::move(route));
  }
  if (controlled.empty()) throw ScenarioError("the first arrival batch has no controlled vehicle");
  b.instance = b.sim->arrival_instance(controlled);
  return b;
}

json network_json(const Network& net) {
  json streets = json::array();
  for (const auto& s : net.streets()) {
    json e = {{"id", s.name}, {"from", s.from}, {"to", s.to}, {"length", s.length}, {"lanes", s.lanes}};
    if (!s.sources.empty()) e["sources"] = s.sources;
    if (s.roundabout) e["roundabout"] = net.roundabouts()[*s.roundabout].name;
    streets.push_back(std::move(e));
  }
  json links = json::array();
  for (const auto& s : net.streets()) {
    for (StreetId t : net.successors(s.id)) links.push_back({s.name, net.street(t).name});
  }
  json rings = json::array();
  for (const auto& r : net.roundabouts()) {
    json members = json::array();
    for (StreetId m : r.members) members.push_back(net.street(m).name);
    rings.push_back({{"id", r.name}, {"capacity", r.capacity}, {"streets", members}});
  }
  return {{"streets", streets}, {"links", links}, {"roundabouts", rings}};
}

int cmd_preprocess(const std::string& path, const std::string& out_path, std::ostream& out) {
  const Loaded l = load(path);
  json report = {{"removed_streets", l.report.removed_streets},
                 {"merged_chains", l.report.merged_chains},
                 {"merge_passes", l.report.merge_passes},
                 {"roundabout_expansions", l.report.roundabout_expansions},
                 {"id_map", l.report.id_map}};
  const json doc = {{"network", network_json(*l.network)}, {"report", report}};
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
    out << "streets " << l.network->size() << ", links " << l.network->link_count() << ", removed "
        << l.report.removed_streets << ", merged chains " << l.report.merged_chains << "\n";
  }
  return kExitOk;
}

void print_schedule(const Instance& inst, const Schedule& schedule, std::ostream& out) {
  const Network& net = *inst.network;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!inst.vehicles[i].controlled()) continue;
    out << "vehicle " << schedule[i].vehicle << " route " << schedule[i].route << ":";
    for (const auto& v : schedule[i].visits) out << ' ' << net.street(v.street).name << '@' << v.enter << '-' << v.exit;
    out << '\n';
  }
}

struct SolveArgs {
  std::string scenario;
  std::optional<double> time_limit;
  std::optional<std::uint64_t> seed;
  std::string facts;
  std::string model;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  Loaded l = load(a.scenario);
  if (a.time_limit) l.scenario.config.solver.time_limit = *a.time_limit;
  if (a.seed) l.scenario.config.solver.seed = *a.seed;
  l.scenario.config.solver.validate();
  const FirstBatch b = first_batch(l);
  if (!a.facts.empty()) write_file(a.facts, export_asp_facts(b.instance));

  const SolveResult r = solve_exact(b.instance, l.scenario.config.solver);
  out << "status: " << status_name(r.status) << '\n';
  err << "solved in " << std::fixed << std::setprecision(3) << r.elapsed << " s, " << r.nodes << " nodes\n";
  if (r.status == SolveStatus::infeasible) return kExitInfeasible;
  if (r.status == SolveStatus::timeout_no_incumbent) return kExitTimeout;
  out << "batch second: " << b.second << '\n';
  out << "objective: " << to_string(r.objective) << '\n';
  print_schedule(b.instance, r.schedule, out);
  if (!a.model.empty()) write_file(a.model, render_model(b.instance, r.schedule));
  return kExitOk;
}

int cmd_check(const std::string& scenario, const std::string& model, std::ostream& out) {
  const Loaded l = load(scenario);
  const FirstBatch b = first_batch(l);
  const Schedule schedule = import_asp_model(read_file(model), b.instance);
  const auto violations = check_schedule(b.instance, schedule, l.scenario.config.solver.check);
  const Network& net = *b.instance.network;
  for (const auto& v : violations) {
    out << rule_name(v.rule) << ' ' << v.vehicle;
    if (v.street) out << ' ' << net.street(*v.street).name;
    if (v.step) out << " @" << *v.step;
    out << ": " << v.detail << '\n';
  }
  if (!violations.empty()) {
    out << violations.size() << " violation(s)\n";
    return kExitInfeasible;
  }
  out << "feasible, objective " << to_string(objective(b.instance, schedule)) << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string scenario;
  std::string policy = "optimized";
  int runs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_limit;
  std::string csv;
  std::string events;
  bool audit = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  Loaded l = load(a.scenario);
  if (a.time_limit) l.scenario.config.solver.time_limit = *a.time_limit;
  std::vector<PolicyKind> kinds;
  if (a.policy == "optimized" || a.policy == "both") kinds.push_back(PolicyKind::optimized);
  if (a.policy == "shortest" || a.policy == "both") kinds.push_back(PolicyKind::shortest);
  const std::uint64_t base = a.seed.value_or(l.scenario.config.seed);

  std::ostringstream csv, events;
  csv << "policy,run,seed";
  for (const auto& [name, value] : kpi_rows({})) csv << ",\"" << name << '"';
  csv << "\n";
  csv << std::setprecision(10);

  std::vector<KpiReport> means;
  for (PolicyKind kind : kinds) {
    std::vector<KpiReport> reports;
    for (int i = 0; i < a.runs; ++i) {
      SimOptions opt;
      opt.seed = base + static_cast<std::uint64_t>(i);
      opt.stall_timeout = l.scenario.config.stall_timeout;
      opt.audit = a.audit;
      const RunResult r = run_scenario(l.network, l.demand, policy_of(l.scenario.config, kind),
                                       l.scenario.config.bands, opt);
      reports.push_back(r.kpi);
      csv << policy_name(kind) << ',' << i << ',' << opt.seed;
      for (const auto& [name, value] : kpi_rows(r.kpi)) csv << ',' << value;
      csv << "\n";
      if (i == 0) events << "# " << policy_name(kind) << '\n' << format_events(*l.network, r.events);

      std::size_t optimal = 0, fallback = 0, audited_bad = 0;
      double slowest = 0;
      for (const auto& c : r.calls) {
        optimal += c.status == SolveStatus::optimal;
        fallback += c.fallback;
        audited_bad += c.audit_ok.has_value() && !*c.audit_ok;
        slowest = std::max(slowest, c.elapsed);
      }
      err << policy_name(kind) << " run " << i << ": " << r.vehicles.size() << " vehicles, peak " << r.peak_in_network
          << " in network";
      if (kind == PolicyKind::optimized) {
        err << ", " << r.calls.size() << " solver calls, " << optimal << " optimal, " << fallback
            << " fallback, slowest " << std::fixed << std::setprecision(3) << slowest << " s";
        if (a.audit) err << ", " << audited_bad << " failed audit";
        err << std::defaultfloat;
      }
      err << '\n';
      if (!r.capacity_safe || !r.conserved) err << "warning: simulator invariant broken\n";
    }
    means.push_back(average(reports));
  }

  out << std::left << std::setw(24) << "KPI";
  for (PolicyKind k : kinds) out << std::right << std::setw(14) << policy_name(k);
  out << '\n';
  const auto rows = kpi_rows({});
  for (std::size_t row = 0; row < rows.size(); ++row) {
    out << std::left << std::setw(24) << rows[row].first;
    for (const auto& m : means) out << std::right << std::setw(14) << std::fixed << std::setprecision(2) << kpi_rows(m)[row].second;
    out << '\n';
  }
  out << std::defaultfloat;
  if (!a.csv.empty()) write_file(a.csv, csv.str());
  if (!a.events.empty()) write_file(a.events, events.str());
  return kExitOk;
}

struct GridArgs {
  GridOptions grid;
  std::size_t vehicles = 50;
  int spread = 60;
  std::uint64_t seed = 1;
  std::vector<std::string> from{"north", "south", "east", "west"};
  std::vector<std::string> to{"north", "south", "east", "west"};
  int quantum = 5;
  double time_limit = 30;
  std::size_t route_limit = 0;
  std::uint64_t node_limit = 0;
  std::string output;
};

int cmd_grid(GridArgs a, std::ostream& out) {
  a.grid.seed = a.seed;
  Scenario s;
  s.network = make_grid(a.grid);
  auto pick = [](const std::vector<std::string>& ids, const std::vector<std::string>& sides) {
    std::vector<std::string> keep;
    for (const auto& id : ids) {
      for (const auto& side : sides) {
        if (id.find("_" + side + "_") != std::string::npos) keep.push_back(id);
      }
    }
    return keep;
  };
  DemandOptions d;
  d.vehicles = a.vehicles;
  d.spread_s = a.spread;
  d.seed = a.seed;
  d.origins = pick(grid_entries(s.network), a.from);
  d.destinations = pick(grid_exits(s.network), a.to);
  if (d.origins.empty() || d.destinations.empty()) throw ScenarioError("no stub matches the requested sides");
  s.demand = random_demand(d);
  s.config.quantum = a.quantum;
  s.config.solver.time_limit = a.time_limit;
  s.config.seed = a.seed;
  if (a.route_limit > 0) s.config.search.route_limit = a.route_limit;
  if (a.node_limit > 0) s.config.solver.node_limit = a.node_limit;
  const std::string text = dump_scenario(s);
  if (a.output.empty()) {
    out << text;
  } else {
    write_file(a.output, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic distribution engine: network simplification, route diversity, exact scheduling, simulation"};
  app.require_subcommand(1);

  std::string pre_path, pre_out;
  auto* pre = app.add_subcommand("preprocess", "Simplify a scenario's network and report what changed");
  pre->add_option("scenario", pre_path, "Scenario JSON file")->required();
  pre->add_option("-o,--output", pre_out, "Write the simplified network here instead of stdout");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Route the first arrival batch of a scenario optimally");
  solve->add_option("scenario", sa.scenario, "Scenario JSON file")->required();
  solve->add_option("--time-limit", sa.time_limit, "Solver cut-off in seconds");
  solve->add_option("--seed", sa.seed, "Tie-break seed");
  solve->add_option("--export-facts", sa.facts, "Write the instance as answer-set facts");
  solve->add_option("-o,--output", sa.model, "Write the schedule as answer-set atoms");

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "Simulate a scenario and report the KPIs");
  sim->add_option("scenario", ma.scenario, "Scenario JSON file")->required();
  sim->add_option("--policy", ma.policy, "Routing policy")
      ->check(CLI::IsMember({"optimized", "shortest", "both"}))
      ->capture_default_str();
  sim->add_option("--runs", ma.runs, "Runs per policy (KPIs are averaged)")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  sim->add_option("--seed", ma.seed, "Seed of the first run; run i uses seed + i");
  sim->add_option("--time-limit", ma.time_limit, "Solver cut-off per controller call in seconds");
  sim->add_option("--csv", ma.csv, "Write per-run KPIs as CSV");
  sim->add_option("--events", ma.events, "Write the event log of each policy's first run");
  sim->add_flag("--audit", ma.audit, "Re-check every returned schedule through the model text format");

  std::string check_scenario, check_model;
  auto* check = app.add_subcommand("check", "Check a schedule (answer-set atoms) against a scenario");
  check->add_option("scenario", check_scenario, "Scenario JSON file")->required();
  check->add_option("model", check_model, "Schedule file")->required();

  GridArgs ga;
  auto* grid = app.add_subcommand("grid", "Generate a grid scenario with random demand");
  grid->add_option("--rows", ga.grid.rows)->capture_default_str();
  grid->add_option("--cols", ga.grid.cols)->capture_default_str();
  grid->add_option("--block", ga.grid.block_m, "Block length in metres")->capture_default_str();
  grid->add_option("--stub", ga.grid.stub_m, "Entry/exit stub length in metres")->capture_default_str();
  grid->add_option("--lanes", ga.grid.lanes)->capture_default_str();
  grid->add_option("--jitter", ga.grid.jitter, "Relative block length jitter")->capture_default_str();
  grid->add_option("--vehicles", ga.vehicles)->capture_default_str();
  grid->add_option("--spread", ga.spread, "Arrivals spread over this many seconds")->capture_default_str();
  grid->add_option("--seed", ga.seed)->capture_default_str();
  grid->add_option("--from", ga.from, "Sides vehicles enter from")->delimiter(',');
  grid->add_option("--to", ga.to, "Sides vehicles leave through")->delimiter(',');
  grid->add_option("--quantum", ga.quantum)->capture_default_str();
  grid->add_option("--time-limit", ga.time_limit)->capture_default_str();
  grid->add_option("--route-limit", ga.route_limit, "Candidate routes per vehicle (0 keeps the default)");
  grid->add_option("--node-limit", ga.node_limit, "Search nodes per solver strategy (0: wall clock only)");
  grid->add_option("-o,--output", ga.output);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (app.get_subcommands().empty()) err << app.help();
    return kExitParse;
  }

  try {
    if (*pre) return cmd_preprocess(pre_path, pre_out, out);
    if (*solve) return cmd_solve(sa, out, err);
    if (*sim) return cmd_simulate(ma, out, err);
    if (*check) return cmd_check(check_scenario, check_model, out);
    if (*grid) return cmd_grid(ga, out);
  } catch (const Stalled& e) {
    err << "stalled: " << e.what() << '\n';
    return kExitStalled;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }
  return kExitParse;
}

}  // namespace tdist
