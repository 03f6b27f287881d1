#include "tdist/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tdist {

namespace {

std::string junction(int r, int c) { return "j_" + std::to_string(r) + "_" + std::to_string(c); }

std::string tag(char dir, int r, int c) {
  return std::string(1, dir) + "_" + std::to_string(r) + "_" + std::to_string(c);
}

}  // namespace

RawNetwork make_grid(const GridOptions& o) {
  if (o.rows < 1 || o.cols < 1 || o.rows * o.cols < 2) throw std::invalid_argument("grid needs at least two junctions");
  if (o.block_m <= 0 || o.stub_m <= 0 || o.lanes < 1) throw std::invalid_argument("grid dimensions must be positive");
  if (o.jitter < 0 || o.jitter >= 1) throw std::invalid_argument("jitter must lie in [0, 1)");

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> factor(1.0 - o.jitter, 1.0 + o.jitter);
  auto block = [&] {
    // rounded to centimetres so dumps stay readable
    // centimetre precision, like surveyed lengths
    const double len = o.jitter > 0 ? std::round(o.block_m * factor(rng) * 100.0) / 100.0 : o.block_m;
    return std::round(len * 100.0) / 100.0;
  };

  RawNetwork net;
  for (int r = 0; r < o.rows; ++r) {
    for (int c = 0; c < o.cols; ++c) net.junctions.push_back(junction(r, c));
  }
  auto street = [&](std::string id, std::string from, std::string to, double len) {
    net.streets.push_back({std::move(id), std::move(from), std::move(to), len, o.lanes, Usage::general, {}, {}});
  };
  // a block has the same length in both directions
  for (int r = 0; r < o.rows; ++r) {
    for (int c = 0; c + 1 < o.cols; ++c) {
      const double len = block();
      street(tag('e', r, c), junction(r, c), junction(r, c + 1), len);
      street(tag('w', r, c + 1), junction(r, c + 1), junction(r, c), len);
    }
  }
  for (int r = 0; r + 1 < o.rows; ++r) {
    for (int c = 0; c < o.cols; ++c) {
      const double len = block();
      street(tag('s', r, c), junction(r, c), junction(r + 1, c), len);
      street(tag('n', r + 1, c), junction(r + 1, c), junction(r, c), len);
    }
  }
  if (o.stubs) {
    auto stub = [&](const std::string& side, int i, const std::string& j) {
      const std::string key = side + "_" + std::to_string(i);
      net.junctions.push_back("src_" + key);
      net.junctions.push_back("snk_" + key);
      street("in_" + key, "src_" + key, j, o.stub_m);
      street("out_" + key, j, "snk_" + key, o.stub_m);
    };
    for (int c = 0; c < o.cols; ++c) stub("north", c, junction(0, c));
    for (int c = 0; c < o.cols; ++c) stub("south", c, junction(o.rows - 1, c));
    for (int r = 0; r < o.rows; ++r) stub("west", r, junction(r, 0));
    for (int r = 0; r < o.rows; ++r) stub("east", r, junction(r, o.cols - 1));
  }
  net.links = derive_links(net.streets);
  return net;
}

namespace {

std::vector<std::string> with_prefix(const RawNetwork& grid, std::string_view prefix) {
  std::vector<std::string> out;
  for (const auto& s : grid.streets) {
    if (s.id.starts_with(prefix)) out.push_back(s.id);
  }
  return out;
}

std::string rim_point(const std::string& id) {
  const auto pos = id.find('_');
  return pos == std::string::npos ? id : id.substr(pos);
}

}  // namespace

std::vector<std::string> grid_entries(const RawNetwork& grid) { return with_prefix(grid, "in_"); }
std::vector<std::string> grid_exits(const RawNetwork& grid) { return with_prefix(grid, "out_"); }

std::vector<DemandSpec> random_demand(const DemandOptions& o) {
  if (o.origins.empty() || o.destinations.empty()) throw std::invalid_argument("demand needs origins and destinations");
  if (o.spread_s < 1) throw std::invalid_argument("arrival spread must be at least one second");
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<std::size_t> pick_o(0, o.origins.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_d(0, o.destinations.size() - 1);
  std::uniform_int_distribution<int> when(0, o.spread_s - 1);

  std::vector<DemandSpec> out;
  for (std::size_t i = 0; i < o.vehicles; ++i) {
    DemandSpec d;
    d.id = "v" + std::to_string(i);
    d.origin = o.origins[pick_o(rng)];
    // entry and exit stubs of the same rim point are adjacent; skip those pairs
    for (int tries = 0; tries < 100; ++tries) {
      d.destination = o.destinations[pick_d(rng)];
      if (d.destination != d.origin && rim_point(d.destination) != rim_point(d.origin)) break;
    }
    d.arrival = o.first_arrival + when(rng);
    out.push_back(std::move(d));
  }
  std::stable_sort(out.begin(), out.end(), [](const DemandSpec& a, const DemandSpec& b) { return a.arrival < b.arrival; });
  return out;
}

}  // namespace tdist
