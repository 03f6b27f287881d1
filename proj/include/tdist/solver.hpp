#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "tdist/schedule.hpp"

namespace tdist {

enum class SolveStatus {
  optimal,               ///< search space exhausted, or the best bound was matched
  feasible_timeout,      ///< cut off; the best schedule found so far is returned
  infeasible,            ///< proven: no schedule satisfies every rule
  timeout_no_incumbent,  ///< cut off before any feasible schedule was found
};

std::string_view status_name(SolveStatus s) noexcept;

struct SolverConfig {
  double time_limit = 30.0;  ///< seconds
  /// Branch and bound that keeps improving its best schedule.
  bool model_improving = true;
  /// Iteratively proves "nothing better than B" and raises B until a schedule appears.
  bool bound_tightening = true;
  std::uint64_t seed = 0;
  /// Stop after this many search nodes (per strategy); treated like a timeout.
  /// With a node limit the two strategies run one after the other instead of
  /// racing, so results do not depend on thread timing.
  std::optional<std::uint64_t> node_limit;
  CheckOptions check;

  void validate() const;
};

struct SolveResult {
  Schedule schedule;
  ObjectiveVector objective;
  SolveStatus status = SolveStatus::infeasible;
  double elapsed = 0.0;
  std::uint64_t nodes = 0;
  /// Every improvement of the shared best schedule, in the order found.
  std::vector<ObjectiveVector> incumbents;

  bool has_schedule() const noexcept {
    return status == SolveStatus::optimal || status == SolveStatus::feasible_timeout;
  }
};

/// Exact lexicographic minimisation of (level 2, level 1).
SolveResult solve_exact(const Instance& instance, const SolverConfig& config = {});

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of raw assignments (route choice x every enter/exit value in its
/// domain) the brute-force search would enumerate.
double brute_force_size(const Instance& instance);

/// Enumerates every assignment, keeps those without violations and returns the
/// lexicographic minimum. Throws TooLarge above `limit` assignments.
SolveResult solve_brute_force(const Instance& instance, double limit = 1e7, const CheckOptions& check = {});

}  // namespace tdist
