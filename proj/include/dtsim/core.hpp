#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

namespace dtsim {

/// Packet counts. Every backlog, arrival, rate and flow is an exact integer.
using Count = std::int64_t;
using Rational = boost::rational<std::int64_t>;

/// Request value meaning "as many as are available"; clipping turns it into a real count.
inline constexpr Count kUnbounded = std::int64_t{1} << 60;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A broken internal contract (e.g. an emulated uplink queue going negative).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Direction { Uplink, Downlink, Bidirectional };
enum class Plane { Uplink = 0, Downlink = 1 };
enum class ControllerMode { Ideal, Naive, UT };
enum class Bootstrap { Idle, ActOnAvailable };

std::string to_string(Direction d);
std::string to_string(Plane p);
std::string to_string(ControllerMode m);
std::string to_string(Bootstrap b);
std::optional<Direction> parse_direction(const std::string& s);
std::optional<ControllerMode> parse_controller(const std::string& s);  // case-insensitive
std::optional<Bootstrap> parse_bootstrap(const std::string& s);
std::optional<Plane> parse_plane(const std::string& s);

/// Dense row-major integer matrix.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, Count fill = 0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  Count& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  Count operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  const std::vector<Count>& values() const { return data_; }
  std::vector<Count>& values() { return data_; }

  Count sum() const;
  void fill(Count v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Count> data_;
};

Grid operator+(const Grid& a, const Grid& b);

/// Flows indexed (transmitter, receiver, class).
class FlowCube {
 public:
  FlowCube() = default;
  FlowCube(int tx, int rx, int classes)
      : tx_(tx), rx_(rx), k_(classes), data_(static_cast<std::size_t>(tx) * rx * classes, 0) {}

  int transmitters() const { return tx_; }
  int receivers() const { return rx_; }
  int classes() const { return k_; }

  Count& operator()(int j, int i, int k) { return data_[index(j, i, k)]; }
  Count operator()(int j, int i, int k) const { return data_[index(j, i, k)]; }

  const std::vector<Count>& values() const { return data_; }

  friend bool operator==(const FlowCube&, const FlowCube&) = default;

 private:
  std::size_t index(int j, int i, int k) const {
    return (static_cast<std::size_t>(j) * rx_ + i) * k_ + k;
  }
  int tx_ = 0;
  int rx_ = 0;
  int k_ = 0;
  std::vector<Count> data_;
};

/// Dimensions of one traffic direction. Transmitters hold the entry queues
/// (external arrivals land there); receivers hold the second-hop queues.
struct PlaneShape {
  int transmitters = 1;
  int receivers = 1;
  int classes = 1;
  friend bool operator==(const PlaneShape&, const PlaneShape&) = default;
};

/// Backlogs of one direction at a slot boundary.
struct QueueState {
  Grid tx;  // (transmitter, class)
  Grid rx;  // (receiver, class)

  static QueueState zeros(const PlaneShape& s) {
    return {Grid(s.transmitters, s.classes), Grid(s.receivers, s.classes)};
  }
  Count total() const { return tx.sum() + rx.sum(); }
  friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// Requested (or served) transfers of one direction for one slot.
/// `sink` is only populated for uplink, where receivers forward to external sinks.
struct Action {
  FlowCube link;
  Grid sink;

  static Action zeros(const PlaneShape& s, Plane p);
  friend bool operator==(const Action&, const Action&) = default;
};

// ---------------------------------------------------------------------------
// Process specifications

struct PoissonArrivals {
  Rational rate;
};
struct ConstantArrivals {
  Count value = 0;
};
struct PeriodicArrivals {
  std::vector<Count> values;
};
struct TraceArrivals {
  std::vector<Count> values;
};
using ArrivalSpec = std::variant<PoissonArrivals, ConstantArrivals, PeriodicArrivals, TraceArrivals>;

struct BernoulliRate {
  Rational p;
  Count rate = 0;
};
struct DiscreteRateDistribution {
  std::vector<Count> values;
  std::vector<Rational> probabilities;
};
struct ConstantRate {
  Count rate = 0;
};
using ChannelSpec = std::variant<BernoulliRate, DiscreteRateDistribution, ConstantRate>;

struct UniformService {
  Count lo = 0;
  Count hi = 0;
};
struct ConstantService {
  Count value = 0;
};
struct ClearAllService {};
using ServiceSpec = std::variant<UniformService, ConstantService, ClearAllService>;

/// Service value meaning "serve everything buffered".
inline constexpr Count kClearAll = kUnbounded;

struct ArrivalEntry {
  Plane plane = Plane::Uplink;
  int node = 0;  // transmitter index within the plane
  int cls = 0;
  ArrivalSpec spec;
};

struct ChannelEntry {
  Plane plane = Plane::Uplink;
  int from = 0;  // transmitter
  int to = 0;    // receiver
  ChannelSpec spec;
};

struct ServiceEntry {
  int node = 0;  // downlink receiver
  int cls = 0;
  ServiceSpec spec;
};

enum class PolicyKind { LCQ, JSQ, LargestBacklog, ThresholdSuspend, MaxWeightMatch, GreedyMatch };
std::string to_string(PolicyKind k);
std::optional<PolicyKind> parse_policy_kind(const std::string& s);

struct PolicySpec {
  PolicyKind kind = PolicyKind::LCQ;
  Count threshold = 0;
  Count serve = 0;
  /// Uplink receiver-to-sink cap per receiver and class; empty means clear everything.
  std::optional<Count> sink_rate;
  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// For Bidirectional: `num_transmitters` counts the uplink transmitters (which
/// are the downlink receivers) and `num_receivers` the uplink receivers (which
/// are the downlink transmitters).
struct Topology {
  int num_transmitters = 1;
  int num_receivers = 1;
  int num_classes = 1;
  Direction direction = Direction::Uplink;
};

struct ScenarioConfig {
  Topology topology;
  int delay = 0;
  int horizon = 1;
  std::vector<ArrivalEntry> arrivals;
  std::vector<ChannelEntry> channels;
  std::vector<ServiceEntry> services;
  PolicySpec uplink_policy;
  PolicySpec downlink_policy;
  ControllerMode controller = ControllerMode::UT;
  Bootstrap bootstrap = Bootstrap::Idle;
  std::uint64_t seed = 1;
  int replications = 1;
};

std::vector<Plane> active_planes(const Topology& t);
PlaneShape plane_shape(const Topology& t, Plane p);
const PolicySpec& policy_for(const ScenarioConfig& cfg, Plane p);
PolicySpec& policy_for(ScenarioConfig& cfg, Plane p);

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Structural and semantic checks. A config that passes is runnable.
ValidationReport validate_config(const ScenarioConfig& cfg);

/// Long-run mean arrival rate; throws ConfigError for empty sequences.
Rational arrival_rate_upper_bound(const ArrivalSpec& spec);

double to_double(const Rational& r);

}  // namespace dtsim
