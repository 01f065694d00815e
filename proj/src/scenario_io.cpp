#include "dtsim/scenario_io.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace dtsim {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::vector<Violation>& out) : out_(out) {}

  void fail(const std::string& field, const std::string& msg) { out_.push_back({field, msg}); }

  void allow_keys(const json& obj, const std::string& field, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) fail(field.empty() ? it.key() : field + "." + it.key(), "unknown key");
    }
  }

  const json* member(const json& obj, const char* key, const std::string& field, bool required = true) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(join(field, key), "missing required key");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::int64_t> integer(const json& obj, const char* key, const std::string& field,
                                      bool required = true) {
    const json* v = member(obj, key, field, required);
    if (!v) return std::nullopt;
    return as_integer(*v, join(field, key));
  }

  std::optional<std::int64_t> as_integer(const json& v, const std::string& field) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      fail(field, "must be an integer (fractional values are rejected)");
    } else {
      fail(field, "must be an integer");
    }
    return std::nullopt;
  }

  std::optional<Rational> rational(const json& v, const std::string& field) {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number_float()) {
      const double x = v.get<double>();
      const double scaled = std::round(x * 1e6);
      if (std::abs(scaled / 1e6 - x) < 1e-12 && std::abs(scaled) < 9e15) {
        return Rational(static_cast<std::int64_t>(scaled), 1000000);
      }
      fail(field, "decimal needs more than 6 fractional digits; write it as \"num/den\"");
      return std::nullopt;
    }
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      const auto slash = s.find('/');
      try {
        if (slash == std::string::npos) return Rational(std::stoll(s));
        const auto den = std::stoll(s.substr(slash + 1));
        if (den == 0) {
          fail(field, "zero denominator");
          return std::nullopt;
        }
        return Rational(std::stoll(s.substr(0, slash)), den);
      } catch (const std::exception&) {
        fail(field, "not a rational number: " + s);
        return std::nullopt;
      }
    }
    fail(field, "must be a number or \"num/den\" string");
    return std::nullopt;
  }

  std::vector<Count> integer_list(const json& obj, const char* key, const std::string& field) {
    std::vector<Count> out;
    const json* v = member(obj, key, field);
    if (!v) return out;
    if (!v->is_array()) {
      fail(join(field, key), "must be an array");
      return out;
    }
    for (std::size_t n = 0; n < v->size(); ++n) {
      if (auto x = as_integer((*v)[n], join(field, key) + "[" + std::to_string(n) + "]")) out.push_back(*x);
    }
    return out;
  }

  std::optional<std::string> string(const json& obj, const char* key, const std::string& field, bool required = true) {
    const json* v = member(obj, key, field, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(join(field, key), "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  static std::string join(const std::string& field, const char* key) {
    return field.empty() ? std::string(key) : field + "." + key;
  }

 private:
  std::vector<Violation>& out_;
};

// Scenario files use 1-based node and class numbers.
int to_index(std::optional<std::int64_t> v) { return v ? static_cast<int>(*v - 1) : 0; }

Plane entry_plane(Reader& r, const json& e, const std::string& field, const Topology& topo) {
  auto s = r.string(e, "direction", field, false);
  if (!s) {
    if (topo.direction == Direction::Bidirectional) {
      r.fail(field + ".direction", "required for bidirectional topologies");
      return Plane::Uplink;
    }
    return topo.direction == Direction::Downlink ? Plane::Downlink : Plane::Uplink;
  }
  if (auto p = parse_plane(*s)) return *p;
  r.fail(field + ".direction", "must be \"uplink\" or \"downlink\"");
  return Plane::Uplink;
}

std::optional<ArrivalSpec> read_arrival(Reader& r, const json& e, const std::string& field) {
  auto kind = r.string(e, "kind", field);
  if (!kind) return std::nullopt;
  if (*kind == "Poisson") {
    r.allow_keys(e, field, {"direction", "node", "class", "kind", "rate"});
    const json* v = r.member(e, "rate", field);
    if (!v) return std::nullopt;
    if (auto q = r.rational(*v, field + ".rate")) return PoissonArrivals{*q};
    return std::nullopt;
  }
  if (*kind == "Constant") {
    r.allow_keys(e, field, {"direction", "node", "class", "kind", "value"});
    if (auto v = r.integer(e, "value", field)) return ConstantArrivals{*v};
    return std::nullopt;
  }
  if (*kind == "PeriodicSequence" || *kind == "ExplicitTrace") {
    r.allow_keys(e, field, {"direction", "node", "class", "kind", "values"});
    auto values = r.integer_list(e, "values", field);
    if (*kind == "PeriodicSequence") return PeriodicArrivals{values};
    return TraceArrivals{values};
  }
  r.fail(field + ".kind", "unknown arrival kind " + *kind);
  return std::nullopt;
}

std::optional<ChannelSpec> read_channel(Reader& r, const json& e, const std::string& field) {
  auto kind = r.string(e, "kind", field);
  if (!kind) return std::nullopt;
  if (*kind == "BernoulliRate") {
    r.allow_keys(e, field, {"direction", "from", "to", "kind", "p", "rate"});
    const json* p = r.member(e, "p", field);
    auto rate = r.integer(e, "rate", field);
    auto prob = p ? r.rational(*p, field + ".p") : std::nullopt;
    if (prob && rate) return BernoulliRate{*prob, *rate};
    return std::nullopt;
  }
  if (*kind == "DiscreteRateDistribution") {
    r.allow_keys(e, field, {"direction", "from", "to", "kind", "values", "probabilities"});
    DiscreteRateDistribution d;
    d.values = r.integer_list(e, "values", field);
    const json* ps = r.member(e, "probabilities", field);
    if (ps && ps->is_array()) {
      for (std::size_t n = 0; n < ps->size(); ++n) {
        if (auto q = r.rational((*ps)[n], field + ".probabilities[" + std::to_string(n) + "]")) {
          d.probabilities.push_back(*q);
        }
      }
    } else if (ps) {
      r.fail(field + ".probabilities", "must be an array");
    }
    return d;
  }
  if (*kind == "ConstantRate") {
    r.allow_keys(e, field, {"direction", "from", "to", "kind", "rate"});
    if (auto v = r.integer(e, "rate", field)) return ConstantRate{*v};
    return std::nullopt;
  }
  r.fail(field + ".kind", "unknown channel kind " + *kind);
  return std::nullopt;
}

std::optional<ServiceSpec> read_service(Reader& r, const json& e, const std::string& field) {
  auto kind = r.string(e, "kind", field);
  if (!kind) return std::nullopt;
  if (*kind == "UniformInteger") {
    r.allow_keys(e, field, {"node", "class", "kind", "lo", "hi"});
    auto lo = r.integer(e, "lo", field);
    auto hi = r.integer(e, "hi", field);
    if (lo && hi) return UniformService{*lo, *hi};
    return std::nullopt;
  }
  if (*kind == "Constant") {
    r.allow_keys(e, field, {"node", "class", "kind", "value"});
    if (auto v = r.integer(e, "value", field)) return ConstantService{*v};
    return std::nullopt;
  }
  if (*kind == "ClearAll") {
    r.allow_keys(e, field, {"node", "class", "kind"});
    return ClearAllService{};
  }
  r.fail(field + ".kind", "unknown service kind " + *kind);
  return std::nullopt;
}

std::optional<PolicySpec> read_policy(Reader& r, const json& e, const std::string& field) {
  if (!e.is_object()) {
    r.fail(field, "must be an object");
    return std::nullopt;
  }
  r.allow_keys(e, field, {"kind", "threshold", "serve", "sink_rate"});
  auto kind = r.string(e, "kind", field);
  if (!kind) return std::nullopt;
  auto k = parse_policy_kind(*kind);
  if (!k) {
    r.fail(field + ".kind", "unknown policy " + *kind);
    return std::nullopt;
  }
  PolicySpec p;
  p.kind = *k;
  const bool threshold = *k == PolicyKind::ThresholdSuspend;
  if (auto v = r.integer(e, "threshold", field, threshold)) p.threshold = *v;
  if (auto v = r.integer(e, "serve", field, threshold)) p.serve = *v;
  if (!threshold && (e.contains("threshold") || e.contains("serve"))) {
    r.fail(field, "threshold/serve only apply to ThresholdSuspend");
  }
  if (e.contains("sink_rate") && !e["sink_rate"].is_null()) {
    if (auto v = r.as_integer(e["sink_rate"], field + ".sink_rate")) p.sink_rate = *v;
  }
  return p;
}

json rational_json(const Rational& r) {
  if (r.denominator() == 1) return r.numerator();
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

json policy_json(const PolicySpec& p) {
  json j = {{"kind", to_string(p.kind)}};
  if (p.kind == PolicyKind::ThresholdSuspend) {
    j["threshold"] = p.threshold;
    j["serve"] = p.serve;
  }
  if (p.sink_rate) j["sink_rate"] = *p.sink_rate;
  return j;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t n = 0; n < byte && n < text.size(); ++n) {
    if (text[n] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ParseResult parse_scenario_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is one past the offending character
    auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("scenario parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                         ": " + e.what(),
                     line, col);
  }

  ParseResult result;
  auto& cfg = result.config;
  Reader r(result.schema.violations);
  if (!doc.is_object()) {
    r.fail("", "scenario must be a JSON object");
    return result;
  }
  r.allow_keys(doc, "", {"topology", "delay", "horizon", "arrivals", "channels", "services", "policy", "controller",
                         "bootstrap", "seed", "replications"});

  if (const json* t = r.member(doc, "topology", "")) {
    if (t->is_object()) {
      r.allow_keys(*t, "topology", {"num_transmitters", "num_receivers", "num_classes", "direction"});
      if (auto v = r.integer(*t, "num_transmitters", "topology")) cfg.topology.num_transmitters = static_cast<int>(*v);
      if (auto v = r.integer(*t, "num_receivers", "topology")) cfg.topology.num_receivers = static_cast<int>(*v);
      if (auto v = r.integer(*t, "num_classes", "topology", false)) cfg.topology.num_classes = static_cast<int>(*v);
      if (auto s = r.string(*t, "direction", "topology")) {
        if (auto d = parse_direction(*s)) {
          cfg.topology.direction = *d;
        } else {
          r.fail("topology.direction", "must be Uplink, Downlink or Bidirectional");
        }
      }
    } else {
      r.fail("topology", "must be an object");
    }
  }
  if (auto v = r.integer(doc, "delay", "")) cfg.delay = static_cast<int>(*v);
  if (auto v = r.integer(doc, "horizon", "")) cfg.horizon = static_cast<int>(*v);

  auto each = [&](const char* key, bool required, auto&& fn) {
    const json* arr = r.member(doc, key, "", required);
    if (!arr) return;
    if (!arr->is_array()) {
      r.fail(key, "must be an array");
      return;
    }
    for (std::size_t n = 0; n < arr->size(); ++n) {
      const std::string field = std::string(key) + "[" + std::to_string(n) + "]";
      if (!(*arr)[n].is_object()) {
        r.fail(field, "must be an object");
        continue;
      }
      fn((*arr)[n], field);
    }
  };

  each("arrivals", true, [&](const json& e, const std::string& field) {
    ArrivalEntry entry;
    entry.plane = entry_plane(r, e, field, cfg.topology);
    entry.node = to_index(r.integer(e, "node", field));
    entry.cls = to_index(r.integer(e, "class", field, false));
    if (auto spec = read_arrival(r, e, field)) {
      entry.spec = *spec;
      cfg.arrivals.push_back(entry);
    }
  });
  each("channels", true, [&](const json& e, const std::string& field) {
    ChannelEntry entry;
    entry.plane = entry_plane(r, e, field, cfg.topology);
    entry.from = to_index(r.integer(e, "from", field));
    entry.to = to_index(r.integer(e, "to", field));
    if (auto spec = read_channel(r, e, field)) {
      entry.spec = *spec;
      cfg.channels.push_back(entry);
    }
  });
  each("services", false, [&](const json& e, const std::string& field) {
    ServiceEntry entry;
    entry.node = to_index(r.integer(e, "node", field));
    entry.cls = to_index(r.integer(e, "class", field, false));
    if (auto spec = read_service(r, e, field)) {
      entry.spec = *spec;
      cfg.services.push_back(entry);
    }
  });

  if (const json* p = r.member(doc, "policy", "")) {
    if (p->is_object() && (p->contains("uplink") || p->contains("downlink"))) {
      r.allow_keys(*p, "policy", {"uplink", "downlink"});
      if (p->contains("uplink")) {
        if (auto s = read_policy(r, (*p)["uplink"], "policy.uplink")) cfg.uplink_policy = *s;
      }
      if (p->contains("downlink")) {
        if (auto s = read_policy(r, (*p)["downlink"], "policy.downlink")) cfg.downlink_policy = *s;
      }
    } else if (auto s = read_policy(r, *p, "policy")) {
      cfg.uplink_policy = *s;
      cfg.downlink_policy = *s;
    }
  }

  if (auto s = r.string(doc, "controller", "")) {
    if (auto m = parse_controller(*s)) {
      cfg.controller = *m;
    } else {
      r.fail("controller", "must be Ideal, Naive or UT");
    }
  }
  if (auto s = r.string(doc, "bootstrap", "", false)) {
    if (auto b = parse_bootstrap(*s)) {
      cfg.bootstrap = *b;
    } else {
      r.fail("bootstrap", "must be Idle or ActOnAvailable");
    }
  }
  if (const json* s = r.member(doc, "seed", "", false)) {
    if (s->is_number_unsigned() || (s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      cfg.seed = s->get<std::uint64_t>();
    } else {
      r.fail("seed", "must be a non-negative integer");
    }
  }
  if (auto v = r.integer(doc, "replications", "", false)) cfg.replications = static_cast<int>(*v);
  return result;
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json doc;
  doc["topology"] = {{"num_transmitters", cfg.topology.num_transmitters},
                     {"num_receivers", cfg.topology.num_receivers},
                     {"num_classes", cfg.topology.num_classes},
                     {"direction", to_string(cfg.topology.direction)}};
  doc["delay"] = cfg.delay;
  doc["horizon"] = cfg.horizon;

  json arrivals = json::array();
  for (const auto& e : cfg.arrivals) {
    json j = {{"direction", to_string(e.plane)}, {"node", e.node + 1}, {"class", e.cls + 1}};
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PoissonArrivals>) {
            j["kind"] = "Poisson";
            j["rate"] = rational_json(s.rate);
          } else if constexpr (std::is_same_v<S, ConstantArrivals>) {
            j["kind"] = "Constant";
            j["value"] = s.value;
          } else if constexpr (std::is_same_v<S, PeriodicArrivals>) {
            j["kind"] = "PeriodicSequence";
            j["values"] = s.values;
          } else {
            j["kind"] = "ExplicitTrace";
            j["values"] = s.values;
          }
        },
        e.spec);
    arrivals.push_back(j);
  }
  doc["arrivals"] = arrivals;

  json channels = json::array();
  for (const auto& e : cfg.channels) {
    json j = {{"direction", to_string(e.plane)}, {"from", e.from + 1}, {"to", e.to + 1}};
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, BernoulliRate>) {
            j["kind"] = "BernoulliRate";
            j["p"] = rational_json(s.p);
            j["rate"] = s.rate;
          } else if constexpr (std::is_same_v<S, DiscreteRateDistribution>) {
            j["kind"] = "DiscreteRateDistribution";
            j["values"] = s.values;
            json ps = json::array();
            for (const auto& p : s.probabilities) ps.push_back(rational_json(p));
            j["probabilities"] = ps;
          } else {
            j["kind"] = "ConstantRate";
            j["rate"] = s.rate;
          }
        },
        e.spec);
    channels.push_back(j);
  }
  doc["channels"] = channels;

  json services = json::array();
  for (const auto& e : cfg.services) {
    json j = {{"node", e.node + 1}, {"class", e.cls + 1}};
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, UniformService>) {
            j["kind"] = "UniformInteger";
            j["lo"] = s.lo;
            j["hi"] = s.hi;
          } else if constexpr (std::is_same_v<S, ConstantService>) {
            j["kind"] = "Constant";
            j["value"] = s.value;
          } else {
            j["kind"] = "ClearAll";
          }
        },
        e.spec);
    services.push_back(j);
  }
  doc["services"] = services;

  if (cfg.topology.direction == Direction::Bidirectional) {
    doc["policy"] = {{"uplink", policy_json(cfg.uplink_policy)}, {"downlink", policy_json(cfg.downlink_policy)}};
  } else {
    doc["policy"] = policy_json(policy_for(cfg, active_planes(cfg.topology).front()));
  }
  doc["controller"] = to_string(cfg.controller);
  doc["bootstrap"] = to_string(cfg.bootstrap);
  doc["seed"] = cfg.seed;
  doc["replications"] = cfg.replications;
  return doc.dump(2);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  // The canonical serialization covers every field that affects a run.
  return serialize_scenario(a) == serialize_scenario(b);
}

}  // namespace dtsim
