#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tdist {

/// Index of a street inside a Network. Streets are numbered in name order.
enum class StreetId : std::uint32_t {};

constexpr std::size_t idx(StreetId s) noexcept { return static_cast<std::size_t>(s); }
constexpr StreetId street_id(std::size_t i) noexcept { return static_cast<StreetId>(i); }

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Band : std::uint8_t { low = 0, medium = 1, heavy = 2 };

inline constexpr std::array<Band, 3> kBands{Band::low, Band::medium, Band::heavy};

std::string_view band_name(Band b) noexcept;

/// Congestion model: occupancy fractions that separate the three bands, the
/// speed of each band and the road length a single car occupies.
///
/// Fractions are kept in tenths so threshold tests stay in integer arithmetic.
struct TrafficBands {
  int low_tenths = 4;
  int high_tenths = 7;
  std::array<double, 3> speed_ms{45.0 / 3.6, 30.0 / 3.6, 15.0 / 3.6};
  double car_slot_m = 8.0;

  static TrafficBands from_kmh(double low, double medium, double heavy);

  double speed(Band b) const noexcept { return speed_ms[static_cast<std::size_t>(b)]; }
  double speed_kmh(Band b) const noexcept { return speed(b) * 3.6; }

  /// Throws std::invalid_argument when the fractions or speeds are inconsistent.
  void validate() const;
};

struct Street {
  StreetId id{};
  std::string name;
  std::string from;
  std::string to;
  double length = 0.0;
  int lanes = 1;
  bool drivable = true;
  std::optional<std::size_t> roundabout;
  std::vector<std::string> sources;
};

struct Roundabout {
  std::string name;
  std::vector<StreetId> members;
  int capacity = 0;
};

/// Input to Network::build. Streets are referenced by name.
struct NetworkSpec {
  struct StreetSpec {
    std::string name;
    std::string from;
    std::string to;
    double length = 0.0;
    int lanes = 1;
    bool drivable = true;
    std::optional<std::string> roundabout;
    std::vector<std::string> sources;
  };
  struct RoundaboutSpec {
    std::string name;
    int capacity = 0;
  };

  std::vector<StreetSpec> streets;
  std::vector<std::pair<std::string, std::string>> links;
  std::vector<RoundaboutSpec> roundabouts;
};

/// Immutable directed street graph. Nodes are streets; links are allowed
/// street-to-street movements.
class Network {
 public:
  Network() = default;

  /// Validates and freezes a network. Throws NetworkError on any invariant
  /// violation (non-positive length, dangling link, discontinuous link, ...).
  static Network build(NetworkSpec spec);

  std::size_t size() const noexcept { return streets_.size(); }
  const Street& street(StreetId s) const { return streets_.at(idx(s)); }
  std::span<const Street> streets() const noexcept { return streets_; }

  std::optional<StreetId> find(std::string_view name) const;
  StreetId at(std::string_view name) const;

  std::span<const StreetId> successors(StreetId s) const { return succ_.at(idx(s)); }
  std::span<const StreetId> predecessors(StreetId s) const { return pred_.at(idx(s)); }
  bool linked(StreetId from, StreetId to) const;
  std::size_t link_count() const noexcept;

  std::span<const Roundabout> roundabouts() const noexcept { return roundabouts_; }

  /// Back to the name-based form; build(to_spec()) reproduces the network.
  NetworkSpec to_spec() const;

 private:
  std::vector<Street> streets_;
  std::vector<std::vector<StreetId>> succ_;
  std::vector<std::vector<StreetId>> pred_;
  std::vector<Roundabout> roundabouts_;
  std::unordered_map<std::string, StreetId> by_name_;
};

/// Number of vehicles a street can hold: ceil(lanes * length / car slot), at least 1.
int capacity_of(double length, int lanes, const TrafficBands& bands);
int capacity_of(const Street& street, const TrafficBands& bands);

/// Congestion band for `occupancy` vehicles on a street of `capacity`.
/// Ties at a threshold go to the more congested band.
Band band_for(int capacity, int occupancy, const TrafficBands& bands);
Band band_for(const Street& street, int occupancy, const TrafficBands& bands);

/// Continuous traversal time in seconds at the band's speed.
double travel_seconds(double length, Band band, const TrafficBands& bands);

/// Traversal time rounded up to whole steps of `quantum` seconds, never below one step.
int travel_steps(double length, Band band, int quantum, const TrafficBands& bands);
int travel_steps(const Street& street, Band band, int quantum, const TrafficBands& bands);

}  // namespace tdist
