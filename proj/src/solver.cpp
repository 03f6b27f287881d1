#include "tdist/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <tuple>

namespace tdist {

std::string_view status_name(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::feasible_timeout:
      return "feasible-timeout";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::timeout_no_incumbent:
      return "timeout-no-incumbent";
  }
  return "infeasible";
}

void SolverConfig::validate() const {
  if (!(time_limit > 0)) throw std::invalid_argument("solver: time limit must be positive");
  if (!model_improving && !bound_tightening) throw std::invalid_argument("solver: no strategy enabled");
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr int kInf = std::numeric_limits<int>::max() / 4;
constexpr std::uint64_t kNone = ~std::uint64_t{0};

// Objective pairs packed into one word so the shared best can be read atomically;
// integer order equals lexicographic order.
std::uint64_t pack(long long l2, long long l1) {
  return (static_cast<std::uint64_t>(l2) << 32) | static_cast<std::uint64_t>(l1);
}

// ---------------------------------------------------------------------------
// Static per-vehicle tables

struct CandPlan {
  std::size_t index = 0;  // into Vehicle::candidates
  std::vector<StreetId> streets;
  std::vector<int> lo, hi, low, max_travel;
  // finish[k * width + e]: earliest final exit after entering street k at e,
  // ignoring other vehicles; kInf if the windows cannot be met.
  std::vector<int> finish;
  int width = 0;

  std::size_t size() const { return streets.size(); }
  int finish_at(std::size_t k, int e) const { return finish[k * width + e]; }
};

struct ConPlan {
  std::size_t vehicle = 0;
  std::vector<CandPlan> cands;
  std::uint64_t table_work = 0;  ///< streets over all candidates: the cost of its solo tables, in nodes
  long long min_streets = 0;
  long long earliest = 0;
};

// A route that links two non-consecutive streets can never satisfy link
// continuity for every linked pair: times strictly increase along a route.
bool has_chord(const Network& net, const std::vector<StreetId>& streets) {
  for (std::size_t i = 0; i < streets.size(); ++i) {
    for (std::size_t j = 0; j < streets.size(); ++j) {
      if (i == j || j == i + 1) continue;
      if (net.linked(streets[i], streets[j])) return true;
    }
  }
  return false;
}

struct Prepared {
  const Instance* inst = nullptr;
  int horizon = 0;
  int width = 1;
  bool strict = false;
  std::vector<ConPlan> con;
  std::vector<std::size_t> sims;
  std::vector<long long> rest2, rest1;  // suffix sums over con
  long long sims_l1 = 0;
  bool dead = false;  // some controlled vehicle has no usable candidate
};

Prepared prepare(const Instance& inst, const SolverConfig& config) {
  Prepared p;
  p.inst = &inst;
  p.horizon = inst.horizon;
  p.width = inst.horizon + 1;
  p.strict = config.check.strict_capacity;
  const Network& net = *inst.network;
  std::mt19937_64 rng(config.seed);

  for (std::size_t v = 0; v < inst.vehicles.size(); ++v) {
    const Vehicle& veh = inst.vehicles[v];
    if (!veh.controlled()) {
      p.sims.push_back(v);
      p.sims_l1 += veh.fixed->exit.back();
      continue;
    }
    ConPlan cp;
    cp.vehicle = v;
    std::vector<std::uint64_t> tiebreak;
    for (std::size_t c = 0; c < veh.candidates.size(); ++c) {
      const auto& cand = veh.candidates[c];
      if (has_chord(net, cand.route.streets)) continue;
      CandPlan plan;
      plan.index = c;
      plan.streets = cand.route.streets;
      plan.width = p.width;
      const std::size_t m = plan.size();
      for (std::size_t k = 0; k < m; ++k) {
        const auto& model = inst.model(plan.streets[k]);
        plan.lo.push_back(std::max(0, cand.bounds.min_enter[k]));
        plan.hi.push_back(std::min(p.horizon, cand.bounds.max_enter[k]));
        plan.low.push_back(model.travel[0]);
        plan.max_travel.push_back(model.max_travel);
      }
      plan.lo[0] = 0;
      plan.hi[0] = std::min(plan.hi[0], 0);
      plan.finish.assign(m * p.width, kInf);
      for (std::size_t k = m; k-- > 0;) {
        for (int e = plan.lo[k]; e <= plan.hi[k]; ++e) {
          int best = kInf;
          const int top = std::min(e + plan.max_travel[k], p.horizon);
          for (int x = e + plan.low[k]; x <= top; ++x) {
            const int f = k + 1 == m ? x : (x >= plan.lo[k + 1] && x <= plan.hi[k + 1] ? plan.finish_at(k + 1, x) : kInf);
            best = std::min(best, f);
          }
          plan.finish[k * p.width + e] = best;
        }
      }
      if (plan.lo[0] > plan.hi[0] || plan.finish_at(0, 0) >= kInf) continue;
      cp.cands.push_back(std::move(plan));
      tiebreak.push_back(config.seed == 0 ? c : rng());
    }
    if (cp.cands.empty()) {
      p.dead = true;
    } else {
      // Earliest finish first, then fewer streets; the seed only reorders exact ties.
      std::vector<std::size_t> order(cp.cands.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = cp.cands[a];
        const auto& cb = cp.cands[b];
        return std::tuple(ca.finish_at(0, 0), ca.size(), tiebreak[a]) <
               std::tuple(cb.finish_at(0, 0), cb.size(), tiebreak[b]);
      });
      std::vector<CandPlan> sorted;
      for (auto i : order) sorted.push_back(std::move(cp.cands[i]));
      cp.cands = std::move(sorted);
      cp.min_streets = std::numeric_limits<long long>::max();
      cp.earliest = std::numeric_limits<long long>::max();
      for (const auto& c : cp.cands) {
        cp.table_work += c.size();
        cp.min_streets = std::min<long long>(cp.min_streets, static_cast<long long>(c.size()));
        cp.earliest = std::min<long long>(cp.earliest, c.finish_at(0, 0));
      }
    }
    p.con.push_back(std::move(cp));
  }
  p.rest2.assign(p.con.size() + 1, 0);
  p.rest1.assign(p.con.size() + 1, 0);
  if (!p.dead) {
    for (std::size_t i = p.con.size(); i-- > 0;) {
      p.rest2[i] = p.rest2[i + 1] + p.con[i].min_streets;
      p.rest1[i] = p.rest1[i + 1] + p.con[i].earliest;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Time-indexed street state with incremental constraint checks

class Board {
 public:
  explicit Board(const Prepared& p)
      : p_(&p),
        width_(p.width),
        occ_(p.inst->streets.size() * p.width, 0),
        ev_(occ_.size(), 0),
        cev_(occ_.size(), 0),
        stays_(p.inst->streets.size()) {}

  long long level2() const { return l2_; }
  int occ(StreetId s, int t) const { return occ_[idx(s) * width_ + t]; }
  int ev(StreetId s, int t) const { return ev_[idx(s) * width_ + t]; }
  int cev(StreetId s, int t) const { return cev_[idx(s) * width_ + t]; }
  const std::vector<std::pair<int, int>>& stays(StreetId s) const { return stays_[idx(s)]; }

  // Occupancy summed over the roundabout members that have an enter event at t.
  int ring_load(std::size_t r, int t) const {
    int total = 0;
    for (StreetId m : p_->inst->network->roundabouts()[r].members) {
      if (ev(m, t) > 0) total += occ(m, t);
    }
    return total;
  }

  // Applies the visit and reports whether every rule it can affect still holds.
  // The visit stays applied either way; undo with remove().
  bool add(StreetId s, int e, int x, bool controlled) {
    const std::size_t base = idx(s) * width_;
    for (int t = e; t < x; ++t) {
      if (ev_[base + t] > 0) ++l2_;
      ++occ_[base + t];
    }
    if (ev_[base + e]++ == 0) l2_ += occ_[base + e];
    if (controlled) {
      ++cev_[base + e];
      stays_[idx(s)].emplace_back(e, x);
    }

    const Instance& inst = *p_->inst;
    const int cap = inst.model(s).capacity;
    for (auto [e2, x2] : stays_[idx(s)]) {
      if (e2 < e || e2 >= x) continue;
      const int n = occ_[base + e2];
      if (n > cap || x2 - e2 < inst.travel(s, n)) return false;
    }
    if (p_->strict) {
      for (int t = e; t < x; ++t) {
        if (ev_[base + t] > 0 && occ_[base + t] > cap) return false;
      }
    }
    if (auto r = inst.roundabout_of(s)) {
      const int rcap = inst.roundabout_capacity(*r);
      for (int t = e; t < x; ++t) {
        if (ev_[base + t] > 0 && ring_load(*r, t) > rcap) return false;
      }
    }
    return true;
  }

  void remove(StreetId s, int e, int x, bool controlled) {
    const std::size_t base = idx(s) * width_;
    if (controlled) {
      --cev_[base + e];
      stays_[idx(s)].pop_back();
    }
    if (--ev_[base + e] == 0) l2_ -= occ_[base + e];
    for (int t = e; t < x; ++t) {
      --occ_[base + t];
      if (ev_[base + t] > 0) --l2_;
    }
  }

 private:
  const Prepared* p_;
  int width_;
  std::vector<int> occ_, ev_, cev_;
  std::vector<std::vector<std::pair<int, int>>> stays_;
  long long l2_ = 0;
};

// ---------------------------------------------------------------------------
// Exact plan for one vehicle given everybody else on the board

struct LastChoice {
  long long added = 0;  // level-2 increase
  int finish = 0;
  std::size_t cand = 0;  // into ConPlan::cands
  std::vector<int> exits;
};

struct PairCost {
  long long l2 = std::numeric_limits<long long>::max();
  int fin = kInf;
  bool finite() const { return fin < kInf; }
  friend bool operator<(const PairCost& a, const PairCost& b) { return std::tie(a.l2, a.fin) < std::tie(b.l2, b.fin); }
};

// Exact cost-to-go of one candidate on a fixed board: f[k * W + e] is the best
// (level-2 increase, final exit) over plans that enter street k at e, and
// choice[k * W + e] the exit that achieves it. With `finish_only` the level-2
// part is left at zero and only the final exit is minimised.
void solo_table(const Prepared& p, const Board& board, const CandPlan& cand, bool finish_only,
                std::vector<PairCost>& f, std::vector<int>& choice) {
  const Instance& inst = *p.inst;
  const int H = p.horizon;
  const int W = p.width;
  const std::size_t m = cand.size();
  std::vector<char> cover_bad(W), entry_ok(W);
  std::vector<int> ev_prefix(W + 1);
  f.assign(m * W, PairCost{});
  choice.assign(m * W, -1);

  for (std::size_t k = m; k-- > 0;) {
    const StreetId s = cand.streets[k];
    const auto& model = inst.model(s);
    const auto ring = inst.roundabout_of(s);
    const int rcap = ring ? inst.roundabout_capacity(*ring) : 0;
    std::fill(cover_bad.begin(), cover_bad.end(), 0);
    for (auto [e2, x2] : board.stays(s)) {
      if (x2 - e2 < inst.travel(s, board.occ(s, e2) + 1)) cover_bad[e2] = 1;
    }
    for (int t = 0; t < W; ++t) {
      const int n = board.occ(s, t);
      const bool guarded = p.strict ? board.ev(s, t) > 0 : board.cev(s, t) > 0;
      if (guarded && n + 1 > model.capacity) cover_bad[t] = 1;
      int load = 0;
      if (ring) {
        load = board.ring_load(*ring, t);
        if (board.ev(s, t) > 0 && load + 1 > rcap) cover_bad[t] = 1;
      }
      bool ok = n + 1 <= model.capacity;
      if (ring && load + (board.ev(s, t) == 0 ? n : 0) + 1 > rcap) ok = false;
      entry_ok[t] = ok;
      ev_prefix[t + 1] = ev_prefix[t] + (board.ev(s, t) > 0 ? 1 : 0);
    }

    for (int e = cand.lo[k]; e <= cand.hi[k]; ++e) {
      if (!entry_ok[e]) continue;
      const int n = board.occ(s, e);
      const int need = inst.travel(s, n + 1);
      const long long base = 1 + (board.ev(s, e) == 0 ? n : 0);
      const int top = std::min(e + cand.max_travel[k], H);
      PairCost bestc;
      int bestx = -1;
      for (int x = e + 1; x <= top; ++x) {
        if (cover_bad[x - 1]) break;
        if (x < e + need) continue;
        PairCost next;
        if (k + 1 == m) {
          next.l2 = 0;
          next.fin = x;
        } else if (x >= cand.lo[k + 1] && x <= cand.hi[k + 1]) {
          next = f[(k + 1) * W + x];
        }
        if (!next.finite()) continue;
        PairCost c{finish_only ? 0 : base + (ev_prefix[x] - ev_prefix[e + 1]) + next.l2, next.fin};
        if (c < bestc) {
          bestc = c;
          bestx = x;
        }
      }
      f[k * W + e] = bestc;
      choice[k * W + e] = bestx;
    }
  }
}

std::optional<LastChoice> best_last(const Prepared& p, const Board& board, const ConPlan& cp,
                                    bool finish_only = false) {
  const int W = p.width;
  std::optional<LastChoice> best;
  std::vector<PairCost> f;
  std::vector<int> choice;
  for (std::size_t ci = 0; ci < cp.cands.size(); ++ci) {
    const CandPlan& cand = cp.cands[ci];
    solo_table(p, board, cand, finish_only, f, choice);
    const PairCost root = f[0];
    if (!root.finite()) continue;
    if (best && !(PairCost{root.l2, root.fin} < PairCost{best->added, best->finish})) continue;
    LastChoice lc;
    lc.added = root.l2;
    lc.finish = root.fin;
    lc.cand = ci;
    int e = 0;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      const int x = choice[k * W + e];
      lc.exits.push_back(x);
      e = x;
    }
    best = std::move(lc);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Shared incumbent and the two strategies

struct Shared {
  std::atomic<std::uint64_t> best{kNone};
  std::atomic<std::uint64_t> proven{kNone};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::vector<ObjectiveVector> history;

  void offer(const ObjectiveVector& o) {
    const std::uint64_t packed = pack(o.level2, o.level1);
    std::lock_guard lock(mu);
    if (packed < best.load()) {
      best.store(packed);
      history.push_back(o);
    }
  }
};

struct Assignment {
  std::vector<std::size_t> cand;  // into ConPlan::cands
  std::vector<std::vector<int>> exits;
  ObjectiveVector objective;
};

class Search {
 public:
  Search(const Prepared& p, Shared& shared, const SolverConfig& config, Clock::time_point deadline)
      : p_(p), shared_(shared), config_(config), deadline_(deadline), board_(p) {
    cur_.cand.assign(p.con.size(), 0);
    cur_.exits.resize(p.con.size());
    tables_.resize(p.con.size());
    sims_ok_ = true;
    for (std::size_t v : p.sims) {
      const Vehicle& veh = p.inst->vehicles[v];
      const auto& streets = veh.candidates.front().route.streets;
      for (std::size_t k = 0; k < streets.size(); ++k) {
        if (!board_.add(streets[k], veh.fixed->enter[k], veh.fixed->exit[k], false)) sims_ok_ = false;
      }
    }
  }
  virtual ~Search() = default;

  std::uint64_t nodes() const { return nodes_; }
  const std::optional<Assignment>& best() const { return best_; }
  bool timed_out() const { return timed_out_; }

 protected:
  // Lower bound of a partial assignment; return true to cut the subtree.
  virtual bool prune(long long lb2, long long lb1) = 0;
  virtual void leaf(const ObjectiveVector& obj) = 0;

  bool alive() const { return !halt_ && !timed_out_; }

  // One node per exit time tried; a solo table costs one node per street.
  bool tick(std::uint64_t work = 1) {
    nodes_ += work;
    if (config_.node_limit && nodes_ >= *config_.node_limit) timed_out_ = true;
    if (nodes_ >= next_check_) {
      next_check_ = nodes_ + 256;
      if (Clock::now() >= deadline_) timed_out_ = true;
      if (shared_.stop.load(std::memory_order_relaxed)) halt_ = true;
    }
    return alive();
  }

  void record(const ObjectiveVector& obj, const std::optional<LastChoice>& last) {
    Assignment a = cur_;
    if (last) {
      a.cand.back() = last->cand;
      a.exits.back() = last->exits;
    }
    a.objective = obj;
    best_ = std::move(a);
    shared_.offer(obj);
  }

  void vehicle(std::size_t i) {
    if (!alive()) return;
    if (i == p_.con.size()) {
      leaf_last_ = std::nullopt;
      leaf({board_.level2(), l1_});
      return;
    }
    if (i + 1 == p_.con.size()) {
      if (!tick(p_.con[i].table_work)) return;
      auto last = best_last(p_, board_, p_.con[i]);
      if (!last) return;
      leaf_last_ = std::move(last);
      leaf({board_.level2() + leaf_last_->added, l1_ + leaf_last_->finish});
      return;
    }
    if (i > 0 && !look_ahead(i)) return;

    // The board on this vehicle's streets stays fixed while its own route is
    // laid out (routes never repeat a street), so its solo cost-to-go is exact
    // for that stretch: it orders the branches and bounds them.
    const ConPlan& cp = p_.con[i];
    if (!tick(cp.table_work)) return;
    auto& tables = tables_[i];
    tables.resize(cp.cands.size());
    std::vector<std::pair<PairCost, std::size_t>> order;
    std::vector<int> scratch;
    for (std::size_t c = 0; c < cp.cands.size(); ++c) {
      solo_table(p_, board_, cp.cands[c], false, tables[c], scratch);
      if (tables[c][0].finite()) order.emplace_back(tables[c][0], c);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [root, c] : order) {
      if (!alive()) return;
      if (prune(board_.level2() + root.l2 + p_.rest2[i + 1], l1_ + root.fin + p_.rest1[i + 1])) continue;
      cur_.cand[i] = c;
      cur_.exits[i].assign(cp.cands[c].size(), 0);
      street(i, cp.cands[c], tables[c], 0, 0);
    }
  }

  void street(std::size_t i, const CandPlan& cand, const std::vector<PairCost>& table, std::size_t k, int e) {
    const Instance& inst = *p_.inst;
    const std::size_t m = cand.size();
    const int W = p_.width;
    const StreetId s = cand.streets[k];
    const int need = inst.travel(s, board_.occ(s, e) + 1);
    int lo_x = e + need;
    int hi_x = std::min(e + cand.max_travel[k], p_.horizon);
    if (k + 1 < m) {
      lo_x = std::max(lo_x, cand.lo[k + 1]);
      hi_x = std::min(hi_x, cand.hi[k + 1]);
    }
    // level-2 increase of staying on s over [e, x): the entry plus one per
    // other enter event the stay covers
    struct Option {
      PairCost cost;
      int x;
    };
    std::vector<Option> options;
    long long inc = 1 + (board_.ev(s, e) == 0 ? board_.occ(s, e) : 0);
    for (int x = e + 1; x <= hi_x; ++x) {
      if (x > e + 1 && board_.ev(s, x - 1) > 0) ++inc;
      if (x < lo_x) continue;
      PairCost rest;
      if (k + 1 == m) {
        rest = PairCost{0, x};
      } else {
        rest = table[(k + 1) * W + x];
      }
      if (!rest.finite()) continue;
      options.push_back({PairCost{inc + rest.l2, rest.fin}, x});
    }
    std::stable_sort(options.begin(), options.end(), [](const Option& a, const Option& b) { return a.cost < b.cost; });

    for (const auto& [cost, x] : options) {
      if (!tick()) return;
      const long long before = board_.level2();
      if (prune(before + cost.l2 + p_.rest2[i + 1], l1_ + cost.fin + p_.rest1[i + 1])) continue;
      const bool ok = board_.add(s, e, x, true);
      if (ok) {
        cur_.exits[i][k] = x;
        if (k + 1 == m) {
          l1_ += x;
          vehicle(i + 1);
          l1_ -= x;
        } else {
          street(i, cand, table, k + 1, x);
        }
      }
      board_.remove(s, e, x, true);
    }
  }

  // Every vehicle still to place must fit on its own; placing the others can
  // only delay it, so its solo earliest finish bounds level 1 from below.
  bool look_ahead(std::size_t i) {
    long long finish = 0;
    for (std::size_t j = i; j < p_.con.size(); ++j) {
      if (!tick(p_.con[j].table_work)) return false;
      auto solo = best_last(p_, board_, p_.con[j], true);
      if (!solo) return false;
      finish += solo->finish;
    }
    return !prune(board_.level2() + p_.rest2[i], l1_ + finish);
  }

  bool start() {
    l1_ = p_.sims_l1;
    return sims_ok_ && !p_.dead;
  }

  ObjectiveVector root_bound() const { return {board_.level2() + p_.rest2[0], p_.sims_l1 + p_.rest1[0]}; }

  const Prepared& p_;
  Shared& shared_;
  const SolverConfig& config_;
  Clock::time_point deadline_;
  Board board_;
  Assignment cur_;
  std::optional<LastChoice> leaf_last_;
  std::optional<Assignment> best_;
  std::vector<std::vector<std::vector<PairCost>>> tables_;  // per depth, per candidate
  long long l1_ = 0;
  std::uint64_t nodes_ = 0;
  std::uint64_t next_check_ = 256;
  bool sims_ok_ = true;
  bool halt_ = false;
  bool timed_out_ = false;
};

// Branch and bound: every leaf better than the best so far becomes the new best.
class ImproveSearch final : public Search {
 public:
  using Search::Search;

  void run() {
    if (start()) vehicle(0);
    exhausted_ = !timed_out_ && !halt_;
    if (exhausted_ || matched_) shared_.stop.store(true);
  }

  bool proved_optimal() const { return (exhausted_ && best_) || matched_; }
  bool proved_infeasible() const { return exhausted_ && !best_; }

 protected:
  bool prune(long long lb2, long long lb1) override {
    if (own_ != kNone && shared_.proven.load(std::memory_order_relaxed) == own_) {
      matched_ = true;
      halt_ = true;
      return true;
    }
    const std::uint64_t lb = pack(lb2, lb1);
    if (own_ != kNone && lb >= own_) return true;
    const std::uint64_t shared = shared_.best.load(std::memory_order_relaxed);
    return shared != kNone && lb > shared;
  }

  void leaf(const ObjectiveVector& obj) override {
    const std::uint64_t packed = pack(obj.level2, obj.level1);
    if (packed >= own_) return;
    own_ = packed;
    record(obj, leaf_last_);
    if (shared_.proven.load() == packed) {
      matched_ = true;
      halt_ = true;
    }
  }

 private:
  std::uint64_t own_ = kNone;
  bool exhausted_ = false;
  bool matched_ = false;
};

// Bound tightening: prove there is no schedule within a level-2 budget, raise
// the budget to the smallest value that was cut off, repeat; then the same on
// level 1 with level 2 fixed at its optimum.
class TightenSearch final : public Search {
 public:
  using Search::Search;

  void run() {
    if (!start()) {
      infeasible_ = true;
      return;
    }
    const ObjectiveVector root = root_bound();
    phase_ = 1;
    cap2_ = root.level2;
    while (true) {
      next_ = std::numeric_limits<long long>::max();
      found_ = false;
      vehicle(0);
      if (found_) break;
      if (timed_out_ || shared_.stop.load()) return;
      if (next_ == std::numeric_limits<long long>::max()) {
        infeasible_ = true;
        return;
      }
      cap2_ = next_;
    }
    halt_ = false;
    cap2_ = best_->objective.level2;
    phase_ = 2;
    cap1_ = root.level1;
    while (true) {
      next_ = std::numeric_limits<long long>::max();
      found_ = false;
      vehicle(0);
      if (found_) break;
      if (timed_out_ || shared_.stop.load()) return;
      cap1_ = next_;  // the phase-one schedule bounds this from above
    }
    proven_ = true;
    shared_.proven.store(pack(best_->objective.level2, best_->objective.level1));
  }

  bool proved_optimal() const { return proven_; }
  bool proved_infeasible() const { return infeasible_; }

 protected:
  bool prune(long long lb2, long long lb1) override {
    if (phase_ == 1) {
      if (lb2 > cap2_) {
        next_ = std::min(next_, lb2);
        return true;
      }
      return false;
    }
    if (lb2 > cap2_) return true;
    if (lb1 > cap1_) {
      next_ = std::min(next_, lb1);
      return true;
    }
    return false;
  }

  void leaf(const ObjectiveVector& obj) override {
    const bool fits = phase_ == 1 ? obj.level2 <= cap2_ : (obj.level2 <= cap2_ && obj.level1 <= cap1_);
    if (!fits) {
      if (phase_ == 1) next_ = std::min(next_, obj.level2);
      else if (obj.level2 <= cap2_) next_ = std::min(next_, obj.level1);
      return;
    }
    record(obj, leaf_last_);
    found_ = true;
    halt_ = true;
  }

 private:
  int phase_ = 1;
  long long cap2_ = 0;
  long long cap1_ = 0;
  long long next_ = 0;
  bool found_ = false;
  bool proven_ = false;
  bool infeasible_ = false;
};

Schedule to_schedule(const Prepared& p, const Assignment* a) {
  const Instance& inst = *p.inst;
  Schedule out(inst.vehicles.size());
  for (std::size_t v : p.sims) {
    const Vehicle& veh = inst.vehicles[v];
    const auto& route = veh.candidates.front().route;
    out[v].vehicle = veh.id;
    out[v].route = route.id;
    for (std::size_t k = 0; k < route.streets.size(); ++k) {
      out[v].visits.push_back({route.streets[k], veh.fixed->enter[k], veh.fixed->exit[k]});
    }
  }
  for (std::size_t i = 0; i < p.con.size(); ++i) {
    const ConPlan& cp = p.con[i];
    const Vehicle& veh = inst.vehicles[cp.vehicle];
    const CandPlan& cand = cp.cands[a->cand[i]];
    auto& plan = out[cp.vehicle];
    plan.vehicle = veh.id;
    plan.route = veh.candidates[cand.index].route.id;
    int e = 0;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      plan.visits.push_back({cand.streets[k], e, a->exits[i][k]});
      e = a->exits[i][k];
    }
  }
  return out;
}

}  // namespace

SolveResult solve_exact(const Instance& instance, const SolverConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config.time_limit));
  const Prepared p = prepare(instance, config);

  Shared shared;
  std::optional<ImproveSearch> a;
  std::optional<TightenSearch> b;
  if (config.model_improving) a.emplace(p, shared, config, deadline);
  if (config.bound_tightening) b.emplace(p, shared, config, deadline);
  if (a && b && config.node_limit) {
    // a work budget makes the outcome reproducible only without a race
    a->run();
    if (!shared.stop.load()) b->run();
  } else if (a && b) {
    std::jthread worker([&] { b->run(); });
    a->run();
  } else if (a) {
    a->run();
  } else {
    b->run();
  }

  SolveResult r;
  const Assignment* chosen = nullptr;
  if (a && a->proved_optimal()) {
    chosen = &*a->best();
    r.status = SolveStatus::optimal;
  } else if (b && b->proved_optimal()) {
    chosen = &*b->best();
    r.status = SolveStatus::optimal;
  } else if ((a && a->proved_infeasible()) || (b && b->proved_infeasible())) {
    r.status = SolveStatus::infeasible;
  } else {
    const Assignment* fa = a && a->best() ? &*a->best() : nullptr;
    const Assignment* fb = b && b->best() ? &*b->best() : nullptr;
    chosen = fa;
    if (fb && (!fa || fb->objective < fa->objective)) chosen = fb;
    r.status = chosen ? SolveStatus::feasible_timeout : SolveStatus::timeout_no_incumbent;
  }
  if (chosen) {
    r.schedule = to_schedule(p, chosen);
    r.objective = chosen->objective;
  }
  r.nodes = (a ? a->nodes() : 0) + (b ? b->nodes() : 0);
  r.incumbents = shared.history;
  r.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// Brute force

namespace {

struct Domain {
  std::vector<int> lo, hi;  // enter domain per street
  std::vector<int> max_travel;
};

Domain domain_of(const Instance& inst, const Candidate& cand) {
  Domain d;
  for (std::size_t k = 0; k < cand.route.streets.size(); ++k) {
    if (k == 0) {
      d.lo.push_back(0);
      d.hi.push_back(0);
    } else {
      d.lo.push_back(std::max(0, cand.bounds.min_enter[k]));
      d.hi.push_back(std::min(inst.horizon, cand.bounds.max_enter[k]));
    }
    d.max_travel.push_back(inst.model(cand.route.streets[k]).max_travel);
  }
  return d;
}

double pairs_on_street(const Instance& inst, const Domain& d, std::size_t k) {
  double n = 0;
  for (int e = d.lo[k]; e <= d.hi[k]; ++e) n += std::max(0, std::min(e + d.max_travel[k], inst.horizon) - e);
  return n;
}

}  // namespace

double brute_force_size(const Instance& inst) {
  double total = 1;
  for (const auto& v : inst.vehicles) {
    if (!v.controlled()) continue;
    double options = 0;
    for (const auto& c : v.candidates) {
      const Domain d = domain_of(inst, c);
      double n = 1;
      for (std::size_t k = 0; k < c.route.streets.size(); ++k) n *= pairs_on_street(inst, d, k);
      options += n;
    }
    total *= options;
  }
  return total;
}

SolveResult solve_brute_force(const Instance& inst, double limit, const CheckOptions& check) {
  const auto t0 = Clock::now();
  const double size = brute_force_size(inst);
  if (size > limit) {
    throw TooLarge("brute force would enumerate " + std::to_string(size) + " assignments");
  }
  const Network& net = *inst.network;

  // Every assignment of one vehicle that respects its own route, windows and
  // link continuity; interactions are left to the full check.
  std::vector<std::vector<VehiclePlan>> options(inst.vehicles.size());
  for (std::size_t v = 0; v < inst.vehicles.size(); ++v) {
    const Vehicle& veh = inst.vehicles[v];
    if (!veh.controlled()) {
      VehiclePlan plan{veh.id, veh.candidates.front().route.id, {}};
      const auto& streets = veh.candidates.front().route.streets;
      for (std::size_t k = 0; k < streets.size(); ++k) {
        plan.visits.push_back({streets[k], veh.fixed->enter[k], veh.fixed->exit[k]});
      }
      options[v].push_back(std::move(plan));
      continue;
    }
    for (const auto& cand : veh.candidates) {
      const Domain d = domain_of(inst, cand);
      const auto& streets = cand.route.streets;
      VehiclePlan plan{veh.id, cand.route.id, std::vector<StreetVisit>(streets.size())};
      auto rec = [&](auto&& self, std::size_t k) -> void {
        if (k == streets.size()) {
          for (std::size_t i = 0; i < streets.size(); ++i) {
            for (std::size_t j = 0; j < streets.size(); ++j) {
              if (i != j && net.linked(streets[i], streets[j]) && plan.visits[j].enter != plan.visits[i].exit) return;
            }
          }
          options[v].push_back(plan);
          return;
        }
        for (int e = d.lo[k]; e <= d.hi[k]; ++e) {
          const int top = std::min(e + d.max_travel[k], inst.horizon);
          for (int x = e + 1; x <= top; ++x) {
            plan.visits[k] = {streets[k], e, x};
            self(self, k + 1);
          }
        }
      };
      rec(rec, 0);
    }
  }

  SolveResult r;
  std::optional<ObjectiveVector> best;
  Schedule current(inst.vehicles.size());
  std::uint64_t visited = 0;
  auto walk = [&](auto&& self, std::size_t v) -> void {
    if (v == inst.vehicles.size()) {
      ++visited;
      if (!check_schedule(inst, current, check).empty()) return;
      const ObjectiveVector obj = objective(inst, current);
      if (!best || obj < *best) {
        best = obj;
        r.schedule = current;
      }
      return;
    }
    for (const auto& plan : options[v]) {
      current[v] = plan;
      self(self, v + 1);
    }
  };
  walk(walk, 0);
  r.nodes = visited;
  if (best) {
    r.objective = *best;
    r.status = SolveStatus::optimal;
  } else {
    r.status = SolveStatus::infeasible;
  }
  r.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

}  // namespace tdist
