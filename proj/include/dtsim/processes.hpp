#pragma once

#include <cstdint>

#include "dtsim/core.hpp"

namespace dtsim {

/// Counter-based random source. Every draw is a pure function of
/// (master seed, stream key, slot, index) built from the SplitMix64 finalizer,
/// so a sample can be addressed directly by slot and any stream can be read
/// shifted in time without replaying it.
class RandomStream {
 public:
  enum class Kind : std::uint32_t { Arrival = 1, Channel = 2, Service = 3 };

  struct Key {
    Kind kind;
    Plane plane;
    int a;  // node / transmitter
    int b;  // class / receiver
  };

  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draw(const Key& key, std::int64_t slot, std::uint32_t index = 0) const;

  /// Seed of an independent replication substream.
  static std::uint64_t replication_seed(std::uint64_t master, int replication);

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0,1) from the top 53 bits.
double unit_interval(std::uint64_t bits);

/// True with probability p (exact rational threshold on the 64-bit draw).
bool bernoulli(const Rational& p, std::uint64_t bits);

/// Integer in [lo, hi] by multiply-shift.
Count uniform_integer(Count lo, Count hi, std::uint64_t bits);

/// Poisson variate by sequential CDF inversion of a single uniform.
Count poisson_inversion(double rate, std::uint64_t bits);

Count sample_arrival(const ArrivalSpec& spec, std::int64_t t, const RandomStream& rs,
                     const RandomStream::Key& key);
Count sample_channel(const ChannelSpec& spec, std::int64_t t, const RandomStream& rs,
                     const RandomStream::Key& key);
/// ClearAll yields kClearAll.
Count sample_service(const ServiceSpec& spec, std::int64_t t, const RandomStream& rs,
                     const RandomStream::Key& key);

/// The process realizations of one direction, addressable by slot.
class PlaneProcesses {
 public:
  PlaneProcesses(const ScenarioConfig& cfg, Plane plane, std::uint64_t seed);

  const PlaneShape& shape() const { return shape_; }
  Plane plane() const { return plane_; }

  Grid arrivals(std::int64_t t) const;  // A(t), (transmitter, class)
  Grid channels(std::int64_t t) const;  // C(t), (transmitter, receiver)
  Grid services(std::int64_t t) const;  // B(t), (receiver, class); empty for uplink

 private:
  Plane plane_;
  PlaneShape shape_;
  RandomStream stream_;
  std::vector<ArrivalSpec> arrivals_;  // tx * classes
  std::vector<ChannelSpec> channels_;  // tx * rx
  std::vector<ServiceSpec> services_;  // rx * classes
};

}  // namespace dtsim
