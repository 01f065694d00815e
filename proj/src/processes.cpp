#include "dtsim/processes.hpp"

#include <cmath>

namespace dtsim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t RandomStream::draw(const Key& key, std::int64_t slot, std::uint32_t index) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(key.kind) << 32 | static_cast<std::uint64_t>(key.plane)));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.a)) << 32 |
                      static_cast<std::uint32_t>(key.b)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(slot));
  return splitmix64(h ^ index);
}

std::uint64_t RandomStream::replication_seed(std::uint64_t master, int replication) {
  return splitmix64(splitmix64(master) ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(replication)));
}

double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

namespace {

// floor(r * 2^64) for r in [0,1); values >= 1 saturate.
unsigned __int128 scaled_threshold(const Rational& r) {
  if (r <= 0) return 0;
  if (r >= 1) return static_cast<unsigned __int128>(1) << 64;
  unsigned __int128 num = static_cast<unsigned __int128>(r.numerator()) << 64;
  return num / static_cast<unsigned __int128>(r.denominator());
}

}  // namespace

bool bernoulli(const Rational& p, std::uint64_t bits) {
  return static_cast<unsigned __int128>(bits) < scaled_threshold(p);
}

Count uniform_integer(Count lo, Count hi, std::uint64_t bits) {
  auto range = static_cast<unsigned __int128>(hi - lo) + 1;
  return lo + static_cast<Count>((static_cast<unsigned __int128>(bits) * range) >> 64);
}

Count poisson_inversion(double rate, std::uint64_t bits) {
  if (rate <= 0) return 0;
  const double u = unit_interval(bits);
  double p = std::exp(-rate);
  double cdf = p;
  Count k = 0;
  // The cap guards against u landing in the floating-point tail beyond the summed mass.
  const Count cap = static_cast<Count>(rate * 20 + 100);
  while (u >= cdf && k < cap) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

Count sample_arrival(const ArrivalSpec& spec, std::int64_t t, const RandomStream& rs,
                     const RandomStream::Key& key) {
  return std::visit(
      [&](const auto& s) -> Count {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, PoissonArrivals>) {
          return poisson_inversion(to_double(s.rate), rs.draw(key, t));
        } else if constexpr (std::is_same_v<S, ConstantArrivals>) {
          return s.value;
        } else if constexpr (std::is_same_v<S, PeriodicArrivals>) {
          auto n = static_cast<std::int64_t>(s.values.size());
          return s.values[static_cast<std::size_t>(((t % n) + n) % n)];
        } else {
          if (t < 0 || t >= static_cast<std::int64_t>(s.values.size())) {
            throw ConfigError("explicit arrival trace does not cover slot " + std::to_string(t));
          }
          return s.values[static_cast<std::size_t>(t)];
        }
      },
      spec);
}

Count sample_channel(const ChannelSpec& spec, std::int64_t t, const RandomStream& rs,
                     const RandomStream::Key& key) {
  return std::visit(
      [&](const auto& s) -> Count {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BernoulliRate>) {
          return bernoulli(s.p, rs.draw(key, t)) ? s.rate : 0;
        } else if constexpr (std::is_same_v<S, DiscreteRateDistribution>) {
          const auto bits = static_cast<unsigned __int128>(rs.draw(key, t));
          Rational cum = 0;
          for (std::size_t n = 0; n + 1 < s.values.size(); ++n) {
            cum += s.probabilities[n];
            if (bits < scaled_threshold(cum)) return s.values[n];
          }
          return s.values.back();
        } else {
          return s.rate;
        }
      },
      spec);
}

Count sample_service(const ServiceSpec& spec, std::int64_t t, const RandomStream& rs,
                     const RandomStream::Key& key) {
  return std::visit(
      [&](const auto& s) -> Count {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformService>) {
          return uniform_integer(s.lo, s.hi, rs.draw(key, t));
        } else if constexpr (std::is_same_v<S, ConstantService>) {
          return s.value;
        } else {
          return kClearAll;
        }
      },
      spec);
}

PlaneProcesses::PlaneProcesses(const ScenarioConfig& cfg, Plane plane, std::uint64_t seed)
    : plane_(plane), shape_(plane_shape(cfg.topology, plane)), stream_(seed) {
  arrivals_.assign(static_cast<std::size_t>(shape_.transmitters) * shape_.classes, ConstantArrivals{0});
  channels_.assign(static_cast<std::size_t>(shape_.transmitters) * shape_.receivers, ConstantRate{0});
  for (const auto& e : cfg.arrivals) {
    if (e.plane == plane) arrivals_[static_cast<std::size_t>(e.node) * shape_.classes + e.cls] = e.spec;
  }
  for (const auto& e : cfg.channels) {
    if (e.plane == plane) channels_[static_cast<std::size_t>(e.from) * shape_.receivers + e.to] = e.spec;
  }
  if (plane == Plane::Downlink) {
    services_.assign(static_cast<std::size_t>(shape_.receivers) * shape_.classes, ConstantService{0});
    for (const auto& e : cfg.services) {
      services_[static_cast<std::size_t>(e.node) * shape_.classes + e.cls] = e.spec;
    }
  }
}

Grid PlaneProcesses::arrivals(std::int64_t t) const {
  Grid a(shape_.transmitters, shape_.classes);
  for (int j = 0; j < shape_.transmitters; ++j) {
    for (int k = 0; k < shape_.classes; ++k) {
      a(j, k) = sample_arrival(arrivals_[static_cast<std::size_t>(j) * shape_.classes + k], t, stream_,
                               {RandomStream::Kind::Arrival, plane_, j, k});
    }
  }
  return a;
}

Grid PlaneProcesses::channels(std::int64_t t) const {
  Grid c(shape_.transmitters, shape_.receivers);
  for (int j = 0; j < shape_.transmitters; ++j) {
    for (int i = 0; i < shape_.receivers; ++i) {
      c(j, i) = sample_channel(channels_[static_cast<std::size_t>(j) * shape_.receivers + i], t, stream_,
                               {RandomStream::Kind::Channel, plane_, j, i});
    }
  }
  return c;
}

Grid PlaneProcesses::services(std::int64_t t) const {
  if (plane_ != Plane::Downlink) return {};
  Grid b(shape_.receivers, shape_.classes);
  for (int i = 0; i < shape_.receivers; ++i) {
    for (int k = 0; k < shape_.classes; ++k) {
      b(i, k) = sample_service(services_[static_cast<std::size_t>(i) * shape_.classes + k], t, stream_,
                               {RandomStream::Kind::Service, plane_, i, k});
    }
  }
  return b;
}

}  // namespace dtsim
