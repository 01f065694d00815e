#include "dtsim/core.hpp"

#include <cctype>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace dtsim {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Poisson inversion underflows e^{-rate} beyond this.
constexpr std::int64_t kMaxPoissonRate = 500;
constexpr int kMaxExactMatching = 16;

std::string link_name(int from, int to) {
  return "(" + std::to_string(from + 1) + "," + std::to_string(to + 1) + ")";
}

}  // namespace

std::string to_string(Direction d) {
  switch (d) {
    case Direction::Uplink: return "Uplink";
    case Direction::Downlink: return "Downlink";
    case Direction::Bidirectional: return "Bidirectional";
  }
  return "?";
}

std::string to_string(Plane p) { return p == Plane::Uplink ? "uplink" : "downlink"; }

std::string to_string(ControllerMode m) {
  switch (m) {
    case ControllerMode::Ideal: return "Ideal";
    case ControllerMode::Naive: return "Naive";
    case ControllerMode::UT: return "UT";
  }
  return "?";
}

std::string to_string(Bootstrap b) { return b == Bootstrap::Idle ? "Idle" : "ActOnAvailable"; }

std::optional<Direction> parse_direction(const std::string& s) {
  auto l = lower(s);
  if (l == "uplink") return Direction::Uplink;
  if (l == "downlink") return Direction::Downlink;
  if (l == "bidirectional") return Direction::Bidirectional;
  return std::nullopt;
}

std::optional<ControllerMode> parse_controller(const std::string& s) {
  auto l = lower(s);
  if (l == "ideal") return ControllerMode::Ideal;
  if (l == "naive") return ControllerMode::Naive;
  if (l == "ut") return ControllerMode::UT;
  return std::nullopt;
}

std::optional<Bootstrap> parse_bootstrap(const std::string& s) {
  auto l = lower(s);
  if (l == "idle") return Bootstrap::Idle;
  if (l == "actonavailable") return Bootstrap::ActOnAvailable;
  return std::nullopt;
}

std::optional<Plane> parse_plane(const std::string& s) {
  auto l = lower(s);
  if (l == "uplink") return Plane::Uplink;
  if (l == "downlink") return Plane::Downlink;
  return std::nullopt;
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::LCQ: return "LCQ";
    case PolicyKind::JSQ: return "JSQ";
    case PolicyKind::LargestBacklog: return "LargestBacklog";
    case PolicyKind::ThresholdSuspend: return "ThresholdSuspend";
    case PolicyKind::MaxWeightMatch: return "MaxWeightMatch";
    case PolicyKind::GreedyMatch: return "GreedyMatch";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy_kind(const std::string& s) {
  for (auto k : {PolicyKind::LCQ, PolicyKind::JSQ, PolicyKind::LargestBacklog,
                 PolicyKind::ThresholdSuspend, PolicyKind::MaxWeightMatch, PolicyKind::GreedyMatch}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

Count Grid::sum() const { return std::accumulate(data_.begin(), data_.end(), Count{0}); }

Grid operator+(const Grid& a, const Grid& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("Grid shape mismatch");
  }
  Grid out = a;
  for (std::size_t n = 0; n < out.values().size(); ++n) out.values()[n] += b.values()[n];
  return out;
}

Action Action::zeros(const PlaneShape& s, Plane p) {
  Action a;
  a.link = FlowCube(s.transmitters, s.receivers, s.classes);
  if (p == Plane::Uplink) a.sink = Grid(s.receivers, s.classes);
  return a;
}

std::vector<Plane> active_planes(const Topology& t) {
  switch (t.direction) {
    case Direction::Uplink: return {Plane::Uplink};
    case Direction::Downlink: return {Plane::Downlink};
    case Direction::Bidirectional: return {Plane::Uplink, Plane::Downlink};
  }
  return {};
}

PlaneShape plane_shape(const Topology& t, Plane p) {
  if (t.direction == Direction::Bidirectional && p == Plane::Downlink) {
    return {t.num_receivers, t.num_transmitters, t.num_classes};
  }
  return {t.num_transmitters, t.num_receivers, t.num_classes};
}

const PolicySpec& policy_for(const ScenarioConfig& cfg, Plane p) {
  return p == Plane::Uplink ? cfg.uplink_policy : cfg.downlink_policy;
}

PolicySpec& policy_for(ScenarioConfig& cfg, Plane p) {
  return p == Plane::Uplink ? cfg.uplink_policy : cfg.downlink_policy;
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t n = 0; n < violations.size(); ++n) {
    if (n) os << "; ";
    os << violations[n].field << ": " << violations[n].message;
  }
  return os.str();
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

Rational arrival_rate_upper_bound(const ArrivalSpec& spec) {
  return std::visit(
      [](const auto& s) -> Rational {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, PoissonArrivals>) {
          return s.rate;
        } else if constexpr (std::is_same_v<S, ConstantArrivals>) {
          return Rational(s.value);
        } else {
          if (s.values.empty()) throw ConfigError("invalid arrival spec: empty sequence");
          Count total = std::accumulate(s.values.begin(), s.values.end(), Count{0});
          return Rational(total, static_cast<std::int64_t>(s.values.size()));
        }
      },
      spec);
}

namespace {

void check_arrival_spec(const ArrivalSpec& spec, const std::string& field, int horizon,
                        std::vector<Violation>& out) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, PoissonArrivals>) {
          if (s.rate < 0) out.push_back({field, "Poisson rate must be >= 0"});
          if (s.rate > kMaxPoissonRate) out.push_back({field, "Poisson rate must be <= 500"});
        } else if constexpr (std::is_same_v<S, ConstantArrivals>) {
          if (s.value < 0) out.push_back({field, "constant arrivals must be >= 0"});
        } else {
          if (s.values.empty()) out.push_back({field, "sequence must be non-empty"});
          for (Count v : s.values) {
            if (v < 0) {
              out.push_back({field, "sequence entries must be >= 0"});
              break;
            }
          }
          if constexpr (std::is_same_v<S, TraceArrivals>) {
            if (!s.values.empty() && static_cast<int>(s.values.size()) < horizon) {
              out.push_back({field, "explicit trace shorter than horizon"});
            }
          }
        }
      },
      spec);
}

void check_channel_spec(const ChannelSpec& spec, const std::string& field, std::vector<Violation>& out) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BernoulliRate>) {
          if (s.p < 0 || s.p > 1) out.push_back({field, "probability must lie in [0,1]"});
          if (s.rate < 0) out.push_back({field, "rate must be >= 0"});
        } else if constexpr (std::is_same_v<S, DiscreteRateDistribution>) {
          if (s.values.empty() || s.values.size() != s.probabilities.size()) {
            out.push_back({field, "values and probabilities must be non-empty and equally long"});
            return;
          }
          Rational total = 0;
          for (std::size_t n = 0; n < s.values.size(); ++n) {
            if (s.values[n] < 0) out.push_back({field, "rates must be >= 0"});
            if (s.probabilities[n] < 0) out.push_back({field, "probabilities must be >= 0"});
            total += s.probabilities[n];
          }
          if (total != Rational(1)) out.push_back({field, "probabilities must sum to 1"});
        } else {
          if (s.rate < 0) out.push_back({field, "rate must be >= 0"});
        }
      },
      spec);
}

void check_service_spec(const ServiceSpec& spec, const std::string& field, std::vector<Violation>& out) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformService>) {
          if (s.lo < 0) out.push_back({field, "lo must be >= 0"});
          if (s.lo > s.hi) out.push_back({field, "lo must be <= hi"});
        } else if constexpr (std::is_same_v<S, ConstantService>) {
          if (s.value < 0) out.push_back({field, "service must be >= 0"});
        }
      },
      spec);
}

void check_policy(const PolicySpec& p, Plane plane, const PlaneShape& shape, std::vector<Violation>& out) {
  const std::string field = "policy." + to_string(plane);
  switch (p.kind) {
    case PolicyKind::LCQ:
    case PolicyKind::LargestBacklog:
      if (plane != Plane::Uplink) out.push_back({field, to_string(p.kind) + " is an uplink policy"});
      break;
    case PolicyKind::ThresholdSuspend:
      if (plane != Plane::Uplink) out.push_back({field, "ThresholdSuspend is an uplink policy"});
      if (shape.transmitters != 1 || shape.receivers != 1) {
        out.push_back({field, "ThresholdSuspend needs a single transmitter-receiver pair"});
      }
      if (p.threshold < 0) out.push_back({field, "threshold must be >= 0"});
      if (p.serve < 0) out.push_back({field, "serve must be >= 0"});
      break;
    case PolicyKind::JSQ:
      if (plane != Plane::Downlink) out.push_back({field, "JSQ is a downlink policy"});
      break;
    case PolicyKind::MaxWeightMatch:
      if (shape.transmitters > kMaxExactMatching || shape.receivers > kMaxExactMatching) {
        out.push_back({field, "MaxWeightMatch is limited to 16x16; use GreedyMatch"});
      }
      break;
    case PolicyKind::GreedyMatch:
      break;
  }
  if (p.sink_rate) {
    if (plane != Plane::Uplink) out.push_back({field, "sink_rate only applies to uplink"});
    if (*p.sink_rate < 0) out.push_back({field, "sink_rate must be >= 0"});
  }
}

}  // namespace

ValidationReport validate_config(const ScenarioConfig& cfg) {
  ValidationReport report;
  auto& out = report.violations;
  const auto& topo = cfg.topology;

  if (topo.num_transmitters < 1) out.push_back({"topology.num_transmitters", "must be >= 1"});
  if (topo.num_receivers < 1) out.push_back({"topology.num_receivers", "must be >= 1"});
  if (topo.num_classes < 1) out.push_back({"topology.num_classes", "must be >= 1"});
  if (cfg.horizon < 1) out.push_back({"horizon", "horizon must be >= 1"});
  if (cfg.delay < 0) out.push_back({"delay", "delay must be >= 0"});
  if (cfg.delay >= cfg.horizon) out.push_back({"delay", "delay must be < horizon"});
  if (cfg.replications < 1) out.push_back({"replications", "must be >= 1"});
  if (!out.empty() && (topo.num_transmitters < 1 || topo.num_receivers < 1 || topo.num_classes < 1)) {
    return report;
  }

  const auto planes = active_planes(topo);
  auto active = [&](Plane p) { return std::find(planes.begin(), planes.end(), p) != planes.end(); };

  std::map<std::tuple<int, int, int>, int> seen_arrivals;
  for (std::size_t n = 0; n < cfg.arrivals.size(); ++n) {
    const auto& e = cfg.arrivals[n];
    const std::string field = "arrivals[" + std::to_string(n) + "]";
    if (!active(e.plane)) {
      out.push_back({field, to_string(e.plane) + " direction is not part of the topology"});
      continue;
    }
    auto shape = plane_shape(topo, e.plane);
    if (e.node < 0 || e.node >= shape.transmitters) {
      out.push_back({field, "transmitter " + std::to_string(e.node + 1) + " outside topology"});
      continue;
    }
    if (e.cls < 0 || e.cls >= shape.classes) {
      out.push_back({field, "class " + std::to_string(e.cls + 1) + " outside topology"});
      continue;
    }
    if (seen_arrivals[{static_cast<int>(e.plane), e.node, e.cls}]++) {
      out.push_back({field, "duplicate arrival spec"});
    }
    check_arrival_spec(e.spec, field, cfg.horizon, out);
  }

  std::map<std::tuple<int, int, int>, int> seen_links;
  for (std::size_t n = 0; n < cfg.channels.size(); ++n) {
    const auto& e = cfg.channels[n];
    const std::string field = "channels[" + std::to_string(n) + "]";
    if (!active(e.plane)) {
      out.push_back({field, to_string(e.plane) + " direction is not part of the topology"});
      continue;
    }
    auto shape = plane_shape(topo, e.plane);
    if (e.from < 0 || e.from >= shape.transmitters || e.to < 0 || e.to >= shape.receivers) {
      out.push_back({field, "link " + link_name(e.from, e.to) + " outside topology"});
      continue;
    }
    if (seen_links[{static_cast<int>(e.plane), e.from, e.to}]++) {
      out.push_back({field, "duplicate channel spec for link " + link_name(e.from, e.to)});
    }
    check_channel_spec(e.spec, field, out);
  }

  std::map<std::pair<int, int>, int> seen_services;
  for (std::size_t n = 0; n < cfg.services.size(); ++n) {
    const auto& e = cfg.services[n];
    const std::string field = "services[" + std::to_string(n) + "]";
    if (!active(Plane::Downlink)) {
      out.push_back({field, "services only apply to downlink receivers"});
      continue;
    }
    auto shape = plane_shape(topo, Plane::Downlink);
    if (e.node < 0 || e.node >= shape.receivers || e.cls < 0 || e.cls >= shape.classes) {
      out.push_back({field, "receiver " + std::to_string(e.node + 1) + " class " +
                                std::to_string(e.cls + 1) + " outside topology"});
      continue;
    }
    if (seen_services[{e.node, e.cls}]++) out.push_back({field, "duplicate service spec"});
    check_service_spec(e.spec, field, out);
  }

  for (Plane p : planes) {
    auto shape = plane_shape(topo, p);
    for (int j = 0; j < shape.transmitters; ++j) {
      for (int k = 0; k < shape.classes; ++k) {
        if (!seen_arrivals.count({static_cast<int>(p), j, k})) {
          out.push_back({"arrivals", "missing " + to_string(p) + " arrival spec for transmitter " +
                                         std::to_string(j + 1) + " class " + std::to_string(k + 1)});
        }
      }
      for (int i = 0; i < shape.receivers; ++i) {
        if (!seen_links.count({static_cast<int>(p), j, i})) {
          out.push_back({"channels", "missing " + to_string(p) + " channel spec for link " + link_name(j, i)});
        }
      }
    }
    if (p == Plane::Downlink) {
      for (int i = 0; i < shape.receivers; ++i) {
        for (int k = 0; k < shape.classes; ++k) {
          if (!seen_services.count({i, k})) {
            out.push_back({"services", "missing service spec for receiver " + std::to_string(i + 1) +
                                           " class " + std::to_string(k + 1)});
          }
        }
      }
    }
    check_policy(policy_for(cfg, p), p, shape, out);
  }
  return report;
}

}  // namespace dtsim
