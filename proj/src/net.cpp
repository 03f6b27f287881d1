#include "tdist/net.hpp"

#include <algorithm>
#include <cmath>

namespace tdist {

namespace {

// Slack for float round-off when a quotient should land exactly on an integer
// (175 m at 12.5 m/s is 14 s, not 14.000000000000002 s).
constexpr double kRoundingSlack = 1e-9;

int ceil_positive(double x) {
  return static_cast<int>(std::ceil(x - kRoundingSlack));
}

}  // namespace

std::string_view band_name(Band b) noexcept {
  switch (b) {
    case Band::low:
      return "low";
    case Band::medium:
      return "medium";
    case Band::heavy:
      return "heavy";
  }
  return "low";
}

TrafficBands TrafficBands::from_kmh(double low, double medium, double heavy) {
  TrafficBands b;
  b.speed_ms = {low / 3.6, medium / 3.6, heavy / 3.6};
  return b;
}

void TrafficBands::validate() const {
  if (!(0 < low_tenths && low_tenths < high_tenths && high_tenths < 10)) {
    throw std::invalid_argument("traffic bands: need 0 < low fraction < high fraction < 1");
  }
  if (!(speed_ms[0] > speed_ms[1] && speed_ms[1] > speed_ms[2] && speed_ms[2] > 0)) {
    throw std::invalid_argument("traffic bands: speeds must strictly decrease with congestion");
  }
  if (!(car_slot_m > 0)) {
    throw std::invalid_argument("traffic bands: car slot must be positive");
  }
}

Network Network::build(NetworkSpec spec) {
  Network net;
  std::sort(spec.streets.begin(), spec.streets.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });

  std::unordered_map<std::string, std::size_t> roundabout_index;
  for (const auto& r : spec.roundabouts) {
    if (r.capacity < 1) {
      throw NetworkError("roundabout '" + r.name + "' has non-positive capacity");
    }
    if (!roundabout_index.emplace(r.name, net.roundabouts_.size()).second) {
      throw NetworkError("duplicate roundabout '" + r.name + "'");
    }
    net.roundabouts_.push_back(Roundabout{r.name, {}, r.capacity});
  }

  net.streets_.reserve(spec.streets.size());
  for (auto& s : spec.streets) {
    if (s.name.empty()) throw NetworkError("street with empty name");
    if (!(s.length > 0)) throw NetworkError("street '" + s.name + "' has non-positive length");
    if (s.lanes < 1) throw NetworkError("street '" + s.name + "' has no lanes");
    const auto id = street_id(net.streets_.size());
    if (!net.by_name_.emplace(s.name, id).second) {
      throw NetworkError("duplicate street '" + s.name + "'");
    }
    Street street;
    street.id = id;
    street.name = std::move(s.name);
    street.from = std::move(s.from);
    street.to = std::move(s.to);
    street.length = s.length;
    street.lanes = s.lanes;
    street.drivable = s.drivable;
    street.sources = s.sources.empty() ? std::vector<std::string>{street.name} : std::move(s.sources);
    if (s.roundabout) {
      auto it = roundabout_index.find(*s.roundabout);
      if (it == roundabout_index.end()) {
        throw NetworkError("street '" + street.name + "' references unknown roundabout '" +
                           *s.roundabout + "'");
      }
      street.roundabout = it->second;
      net.roundabouts_[it->second].members.push_back(id);
    }
    net.streets_.push_back(std::move(street));
  }

  net.succ_.assign(net.streets_.size(), {});
  net.pred_.assign(net.streets_.size(), {});
  for (const auto& [a, b] : spec.links) {
    auto from = net.find(a);
    auto to = net.find(b);
    if (!from || !to) {
      throw NetworkError("link " + a + " -> " + b + " references an unknown street");
    }
    if (*from == *to) throw NetworkError("link " + a + " -> " + b + " links a street to itself");
    if (net.street(*from).to != net.street(*to).from) {
      throw NetworkError("link " + a + " -> " + b + " is not continuous");
    }
    net.succ_[idx(*from)].push_back(*to);
    net.pred_[idx(*to)].push_back(*from);
  }
  for (auto* adj : {&net.succ_, &net.pred_}) {
    for (auto& v : *adj) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }
  for (const auto& r : net.roundabouts_) {
    if (r.members.empty()) throw NetworkError("roundabout '" + r.name + "' has no member street");
  }
  return net;
}

std::optional<StreetId> Network::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

StreetId Network::at(std::string_view name) const {
  if (auto s = find(name)) return *s;
  throw NetworkError("unknown street '" + std::string(name) + "'");
}

bool Network::linked(StreetId from, StreetId to) const {
  const auto& v = succ_.at(idx(from));
  return std::binary_search(v.begin(), v.end(), to);
}

std::size_t Network::link_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : succ_) n += v.size();
  return n;
}

NetworkSpec Network::to_spec() const {
  NetworkSpec spec;
  for (const auto& r : roundabouts_) spec.roundabouts.push_back({r.name, r.capacity});
  for (const auto& s : streets_) {
    NetworkSpec::StreetSpec ss;
    ss.name = s.name;
    ss.from = s.from;
    ss.to = s.to;
    ss.length = s.length;
    ss.lanes = s.lanes;
    ss.drivable = s.drivable;
    if (s.roundabout) ss.roundabout = roundabouts_[*s.roundabout].name;
    ss.sources = s.sources;
    spec.streets.push_back(std::move(ss));
    for (auto t : succ_[idx(s.id)]) spec.links.emplace_back(s.name, streets_[idx(t)].name);
  }
  return spec;
}

int capacity_of(double length, int lanes, const TrafficBands& bands) {
  return std::max(1, ceil_positive(static_cast<double>(lanes) * length / bands.car_slot_m));
}

int capacity_of(const Street& street, const TrafficBands& bands) {
  return capacity_of(street.length, street.lanes, bands);
}

Band band_for(int capacity, int occupancy, const TrafficBands& bands) {
  // occupancy < frac * capacity  <=>  10 * occupancy < tenths * capacity
  const long long scaled = 10LL * occupancy;
  if (scaled < static_cast<long long>(bands.low_tenths) * capacity) return Band::low;
  if (scaled < static_cast<long long>(bands.high_tenths) * capacity) return Band::medium;
  return Band::heavy;
}

Band band_for(const Street& street, int occupancy, const TrafficBands& bands) {
  return band_for(capacity_of(street, bands), occupancy, bands);
}

double travel_seconds(double length, Band band, const TrafficBands& bands) {
  return length / bands.speed(band);
}

int travel_steps(double length, Band band, int quantum, const TrafficBands& bands) {
  if (quantum <= 0) throw std::invalid_argument("quantum must be positive");
  return std::max(1, ceil_positive(travel_seconds(length, band, bands) / quantum));
}

int travel_steps(const Street& street, Band band, int quantum, const TrafficBands& bands) {
  return travel_steps(street.length, band, quantum, bands);
}

}  // namespace tdist
