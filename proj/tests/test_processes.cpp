#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "dtsim/processes.hpp"

using namespace dtsim;

namespace {

constexpr std::uint64_t kHalf = std::uint64_t{1} << 63;

// Independent Poisson quantile via log-pmf summation.
Count poisson_quantile(double rate, double u) {
  double cdf = 0;
  for (Count k = 0;; ++k) {
    cdf += std::exp(k * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1));
    if (u < cdf) return k;
  }
}

}  // namespace

TEST_CASE("splitmix64 reference value") {
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("bernoulli thresholds are exact") {
  CHECK(bernoulli(Rational(1, 2), kHalf - 1));
  CHECK_FALSE(bernoulli(Rational(1, 2), kHalf));
  CHECK_FALSE(bernoulli(Rational(0), 0));
  CHECK(bernoulli(Rational(1), ~std::uint64_t{0}));
  // floor(2^64 / 3) = 0x5555555555555555
  CHECK(bernoulli(Rational(1, 3), 0x5555555555555554ULL));
  CHECK_FALSE(bernoulli(Rational(1, 3), 0x5555555555555555ULL));
}

TEST_CASE("uniform integers cover the closed range") {
  CHECK(uniform_integer(3, 7, 0) == 3);
  CHECK(uniform_integer(3, 7, ~std::uint64_t{0}) == 7);
  CHECK(uniform_integer(0, 1, kHalf - 1) == 0);
  CHECK(uniform_integer(0, 1, kHalf) == 1);
  RandomStream rs(11);
  std::map<Count, int> seen;
  const RandomStream::Key key{RandomStream::Kind::Service, Plane::Downlink, 0, 0};
  for (int t = 0; t < 6000; ++t) ++seen[uniform_integer(0, 5, rs.draw(key, t))];
  CHECK(seen.size() == 6);
  for (auto [v, n] : seen) CHECK(std::abs(n - 1000) < 150);
}

TEST_CASE("Poisson inversion agrees with an independent quantile") {
  RandomStream rs(5);
  const RandomStream::Key key{RandomStream::Kind::Arrival, Plane::Uplink, 1, 0};
  for (double rate : {0.5, 3.0, 15.0}) {
    for (int t = 0; t < 500; ++t) {
      const auto bits = rs.draw(key, t);
      CHECK(poisson_inversion(rate, bits) == poisson_quantile(rate, unit_interval(bits)));
    }
  }
  CHECK(poisson_inversion(0.0, 123) == 0);
}

TEST_CASE("Poisson sample mean") {
  RandomStream rs(9);
  const RandomStream::Key key{RandomStream::Kind::Arrival, Plane::Uplink, 0, 0};
  const int n = 20000;
  double sum = 0;
  for (int t = 0; t < n; ++t) sum += static_cast<double>(sample_arrival(PoissonArrivals{Rational(6)}, t, rs, key));
  CHECK(sum / n == doctest::Approx(6.0).epsilon(0.02));
}

TEST_CASE("deterministic sequences") {
  RandomStream rs(1);
  const RandomStream::Key key{RandomStream::Kind::Arrival, Plane::Uplink, 0, 0};
  const PeriodicArrivals p{{6, 0, 3}};
  CHECK(sample_arrival(p, 0, rs, key) == 6);
  CHECK(sample_arrival(p, 4, rs, key) == 0);
  CHECK(sample_arrival(p, -1, rs, key) == 3);
  const TraceArrivals tr{{1, 2}};
  CHECK(sample_arrival(tr, 1, rs, key) == 2);
  CHECK_THROWS_AS(sample_arrival(tr, 2, rs, key), ConfigError);
  CHECK(sample_service(ClearAllService{}, 0, rs, key) == kClearAll);
  CHECK(sample_service(ConstantService{4}, 0, rs, key) == 4);
  CHECK(sample_channel(ConstantRate{7}, 3, rs, key) == 7);
}

TEST_CASE("discrete rate distribution frequencies") {
  RandomStream rs(3);
  const RandomStream::Key key{RandomStream::Kind::Channel, Plane::Uplink, 0, 1};
  const DiscreteRateDistribution d{{0, 5, 10, 20}, {Rational(1, 10), Rational(2, 10), Rational(4, 10), Rational(3, 10)}};
  std::map<Count, int> seen;
  const int n = 20000;
  for (int t = 0; t < n; ++t) ++seen[sample_channel(d, t, rs, key)];
  CHECK(seen[0] == doctest::Approx(0.1 * n).epsilon(0.08));
  CHECK(seen[5] == doctest::Approx(0.2 * n).epsilon(0.05));
  CHECK(seen[10] == doctest::Approx(0.4 * n).epsilon(0.05));
  CHECK(seen[20] == doctest::Approx(0.3 * n).epsilon(0.05));
}

TEST_CASE("streams are addressable by slot and independent of read order") {
  ScenarioConfig c;
  c.topology = {2, 2, 1, Direction::Uplink};
  c.horizon = 50;
  c.arrivals = {{Plane::Uplink, 0, 0, PoissonArrivals{Rational(4)}}, {Plane::Uplink, 1, 0, PoissonArrivals{Rational(2)}}};
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) c.channels.push_back({Plane::Uplink, j, i, BernoulliRate{Rational(1, 2), 9}});
  }
  PlaneProcesses a(c, Plane::Uplink, 77), b(c, Plane::Uplink, 77), other(c, Plane::Uplink, 78);
  std::vector<Grid> forward;
  for (int t = 0; t < 50; ++t) forward.push_back(a.channels(t));
  bool differs = false;
  for (int t = 49; t >= 0; --t) {
    CHECK(b.channels(t) == forward[static_cast<std::size_t>(t)]);
    CHECK(b.arrivals(t) == a.arrivals(t));
    differs = differs || other.arrivals(t) != a.arrivals(t);
  }
  CHECK(differs);
  CHECK(a.services(0).empty());
}

TEST_CASE("replication seeds differ") {
  std::set<std::uint64_t> seeds;
  for (int r = 0; r < 100; ++r) seeds.insert(RandomStream::replication_seed(1, r));
  CHECK(seeds.size() == 100);
  CHECK(RandomStream::replication_seed(1, 0) == RandomStream::replication_seed(1, 0));
}
