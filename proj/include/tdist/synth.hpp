#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdist/prep.hpp"
#include "tdist/scenario.hpp"

namespace tdist {

/// Manhattan grid of two-way streets. Junction (r, c) is `j_r_c`; the street
/// leaving it eastwards is `e_r_c` (likewise `w_`, `s_`, `n_`). With `stubs`,
/// every boundary junction gets an entry street `in_<side>_<i>` and an exit
/// street `out_<side>_<i>` per outward side, so demand can enter and leave
/// the grid at its rim.
struct GridOptions {
  int rows = 8;
  int cols = 8;
  double block_m = 100.0;
  double stub_m = 100.0;
  int lanes = 1;
  /// Each block length is multiplied by a factor drawn from [1 - jitter, 1 + jitter].
  double jitter = 0.0;
  bool stubs = true;
  std::uint64_t seed = 0;
};

RawNetwork make_grid(const GridOptions& options);

/// Ids of the entry and exit stubs of a grid network, in a fixed order.
std::vector<std::string> grid_entries(const RawNetwork& grid);
std::vector<std::string> grid_exits(const RawNetwork& grid);

struct DemandOptions {
  std::size_t vehicles = 50;
  int first_arrival = 0;
  /// Arrivals are spread uniformly over [first_arrival, first_arrival + spread).
  int spread_s = 60;
  /// Origins and destinations are drawn from these lists (street ids).
  std::vector<std::string> origins;
  std::vector<std::string> destinations;
  std::uint64_t seed = 0;
};

/// Random controlled demand sorted by arrival (stable in draw order). Ids are
/// `v0`, `v1`, ... in draw order. An origin and destination sharing a rim
/// point (`in_west_3` / `out_west_3`) are redrawn.
std::vector<DemandSpec> random_demand(const DemandOptions& options);

}  // namespace tdist
