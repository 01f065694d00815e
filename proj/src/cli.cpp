#include "dtsim/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dtsim/analysis.hpp"
#include "dtsim/scenario_io.hpp"

namespace dtsim {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ArrivalEntry arrival(Plane p, int node, ArrivalSpec spec) { return {p, node, 0, std::move(spec)}; }
ChannelEntry channel(Plane p, int from, int to, ChannelSpec spec) { return {p, from, to, std::move(spec)}; }

ScenarioConfig fig2() {
  ScenarioConfig c;
  c.topology = {2, 1, 1, Direction::Uplink};
  c.delay = 1;
  c.horizon = 200;
  c.arrivals = {arrival(Plane::Uplink, 0, ConstantArrivals{5}),
                arrival(Plane::Uplink, 1, PeriodicArrivals{{8, 0}})};
  c.channels = {channel(Plane::Uplink, 0, 0, ConstantRate{10}), channel(Plane::Uplink, 1, 0, ConstantRate{8})};
  c.uplink_policy.kind = PolicyKind::LargestBacklog;
  c.downlink_policy = c.uplink_policy;
  return c;
}

ScenarioConfig fig6() {
  ScenarioConfig c;
  c.topology = {1, 1, 1, Direction::Uplink};
  c.delay = 2;
  c.horizon = 1000;
  c.arrivals = {arrival(Plane::Uplink, 0, ConstantArrivals{10})};
  c.channels = {channel(Plane::Uplink, 0, 0, ConstantRate{10})};
  c.uplink_policy = {PolicyKind::ThresholdSuspend, 10, 10, std::nullopt};
  c.downlink_policy = c.uplink_policy;
  return c;
}

ScenarioConfig dsa() {
  ScenarioConfig c;
  c.topology = {10, 1, 1, Direction::Uplink};
  c.delay = 4;
  c.horizon = 2000;
  c.replications = 50;
  c.bootstrap = Bootstrap::ActOnAvailable;
  const std::vector<std::vector<Count>> periodic{{0, 4}, {6, 0, 3}, {8, 0}, {10, 0, 5}, {12, 0}};
  for (int j = 0; j < 5; ++j) c.arrivals.push_back(arrival(Plane::Uplink, j, PoissonArrivals{Rational(2 + j)}));
  for (int j = 0; j < 5; ++j) c.arrivals.push_back(arrival(Plane::Uplink, 5 + j, PeriodicArrivals{periodic[j]}));
  for (int j = 0; j < 10; ++j) {
    c.channels.push_back(channel(Plane::Uplink, j, 0, BernoulliRate{Rational(5 + j % 5, 10), 100}));
  }
  c.uplink_policy.kind = PolicyKind::LCQ;
  c.downlink_policy = c.uplink_policy;
  return c;
}

ScenarioConfig lb() {
  ScenarioConfig c;
  c.topology = {1, 5, 1, Direction::Downlink};
  c.delay = 4;
  c.horizon = 2000;
  c.replications = 50;
  c.bootstrap = Bootstrap::ActOnAvailable;
  c.arrivals = {arrival(Plane::Downlink, 0, PoissonArrivals{Rational(15)})};
  for (int j = 0; j < 5; ++j) {
    c.channels.push_back(channel(Plane::Downlink, 0, j, BernoulliRate{Rational(4, 5), 100}));
    c.services.push_back({j, 0, UniformService{0, 4 + 2 * j}});
  }
  c.downlink_policy.kind = PolicyKind::JSQ;
  c.uplink_policy = c.downlink_policy;
  return c;
}

ScenarioConfig bidir() {
  ScenarioConfig c;
  c.topology = {5, 5, 1, Direction::Bidirectional};
  c.delay = 4;
  c.horizon = 2000;
  c.replications = 20;
  c.bootstrap = Bootstrap::ActOnAvailable;
  const DiscreteRateDistribution rates{{0, 5, 10, 20}, {Rational(1, 10), Rational(2, 10), Rational(4, 10),
                                                        Rational(3, 10)}};
  for (int n = 0; n < 5; ++n) {
    c.arrivals.push_back(arrival(Plane::Uplink, n, PoissonArrivals{Rational(3)}));
    c.arrivals.push_back(arrival(Plane::Downlink, n, PoissonArrivals{Rational(3)}));
    c.services.push_back({n, 0, UniformService{0, 10}});
  }
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      c.channels.push_back(channel(Plane::Uplink, a, b, rates));
      c.channels.push_back(channel(Plane::Downlink, a, b, rates));
    }
  }
  c.uplink_policy.kind = PolicyKind::MaxWeightMatch;
  c.downlink_policy.kind = PolicyKind::MaxWeightMatch;
  return c;
}

std::string tuple(const std::vector<Count>& v) {
  std::string s = "(";
  for (std::size_t n = 0; n < v.size(); ++n) s += (n ? "," : "") + std::to_string(v[n]);
  return s + ")";
}

std::vector<ControllerMode> parse_modes(const std::vector<std::string>& names) {
  std::vector<ControllerMode> out;
  for (const auto& n : names) {
    auto m = parse_controller(n);
    if (!m) throw UsageError("unknown mode " + n + " (expected ideal, naive or ut)");
    out.push_back(*m);
  }
  return out;
}

// Common per-run overrides.
struct Overrides {
  std::string scenario;
  std::optional<std::string> mode;
  std::optional<int> delay;
  std::optional<int> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::int64_t warmup = 0;
  std::optional<std::string> out;
  std::string format = "table";

  void attach(CLI::App* app, bool with_mode) {
    app->add_option("--scenario", scenario, "builtin name or scenario JSON file")->required();
    if (with_mode) app->add_option("--mode", mode, "ideal, naive or ut");
    app->add_option("--delay", delay, "observation delay D");
    app->add_option("--horizon", horizon, "number of slots T");
    app->add_option("--seed", seed, "master seed (overrides DTSIM_SEED)");
    app->add_option("--reps", reps, "replications");
    app->add_option("--warmup", warmup, "slots excluded from averages");
    app->add_option("--out", out, "output file");
    app->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
  }

  ScenarioConfig resolve() const {
    ScenarioConfig cfg = load_scenario(scenario);
    if (const char* env = std::getenv("DTSIM_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("DTSIM_SEED is not an unsigned integer: ") + env);
      }
    }
    if (mode) cfg.controller = parse_modes({*mode}).front();
    if (delay) cfg.delay = *delay;
    if (horizon) cfg.horizon = *horizon;
    if (seed) cfg.seed = *seed;
    if (reps) cfg.replications = *reps;
    if (auto rep = validate_config(cfg); !rep.ok()) throw ConfigError(rep.to_string());
    if (warmup < 0 || warmup >= cfg.horizon) throw UsageError("--warmup must lie in [0, horizon)");
    return cfg;
  }
};

Rational total_rate(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.delay = 1;
  return theorem_gap_bound(c);
}

void warn_if_diverging(const ScenarioConfig& cfg, const Trace& trace, std::ostream& err) {
  const std::int64_t half = trace.horizon / 2;
  if (trace.horizon - half < 2) return;
  const Rational slope = stability_slope(trace, half);
  const Rational limit = total_rate(cfg) * Rational(1, 20);
  if (slope > limit && slope > 0) {
    err << "warning: total backlog grows by " << format_decimal(slope, 3) << " packets/slot over [" << half << ","
        << trace.horizon << "); the system looks unstable\n";
  }
}

int cmd_list(std::ostream& out) {
  for (const auto& n : builtin_names()) out << n << '\n';
  return 0;
}

std::ostream& target(const std::optional<std::string>& path, std::ofstream& file, std::ostream& fallback) {
  if (!path) return fallback;
  file.open(*path);
  if (!file) throw std::runtime_error("cannot open " + *path + " for writing");
  return file;
}

int cmd_run(const Overrides& o, std::optional<std::string> trace_out, std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = o.resolve();
  const auto traces = run_replications(cfg);
  if (trace_out) {
    std::ofstream f(*trace_out);
    if (!f) throw std::runtime_error("cannot open " + *trace_out + " for writing");
    write_trace_csv(f, traces.front(), cfg);
  }
  ComparisonReport report;
  report.warmup = o.warmup;
  ComparisonRow row;
  row.mode = cfg.controller;
  row.delay = cfg.delay;
  row.summary = summarize_backlog(traces, o.warmup);
  if (cfg.controller == ControllerMode::UT) row.gap_bound = theorem_gap_bound(cfg);
  report.rows.push_back(std::move(row));

  std::ofstream file;
  std::ostream& os = target(o.out, file, out);
  if (o.format == "csv") {
    write_comparison_csv(os, report);
  } else {
    os << "scenario " << o.scenario << ", horizon " << cfg.horizon << ", warmup " << o.warmup << ", seed " << cfg.seed
       << '\n';
    write_comparison_table(os, report);
  }
  warn_if_diverging(cfg, traces.front(), err);
  return 0;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad ") + what + " entry: " + item);
    }
  }
  if (out.empty()) throw UsageError(std::string(what) + " list is empty");
  return out;
}

int cmd_sweep(const Overrides& o, const std::string& modes, const std::string& delays, std::ostream& out) {
  const auto delay_list = parse_int_list(delays, "delay");
  std::vector<std::string> names;
  std::stringstream ss(modes);
  for (std::string m; std::getline(ss, m, ',');) {
    if (!m.empty()) names.push_back(m);
  }
  if (names.empty()) throw UsageError("mode list is empty");
  const auto mode_list = parse_modes(names);
  ScenarioConfig cfg = o.resolve();
  for (int d : delay_list) {
    cfg.delay = d;
    if (auto rep = validate_config(cfg); !rep.ok()) throw ConfigError(rep.to_string());
  }
  const auto report = compare_modes(cfg, mode_list, delay_list, o.warmup);
  std::ofstream file;
  std::ostream& os = target(o.out, file, out);
  if (o.format == "table") {
    write_comparison_table(os, report);
  } else {
    write_comparison_csv(os, report);
  }
  return 0;
}

int cmd_trace(const Overrides& o, std::int64_t slots, std::ostream& out) {
  ScenarioConfig cfg = o.resolve();
  if (slots < 1 || slots > cfg.horizon) throw UsageError("--slots must lie in [1, horizon]");
  cfg.replications = 1;
  const auto trace = run(cfg, 0);
  std::ofstream file;
  std::ostream& os = target(o.out, file, out);
  if (o.format == "csv") {
    write_trace_csv(os, trace, cfg);
  } else {
    write_trace_table(os, trace, slots);
  }
  return 0;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"fig2-uplink", "fig6-suspend", "dsa-uplink", "lb-downlink", "bidir"}; }

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "fig2-uplink") return fig2();
  if (name == "fig6-suspend") return fig6();
  if (name == "dsa-uplink") return dsa();
  if (name == "lb-downlink") return lb();
  if (name == "bidir") return bidir();
  throw ConfigError("unknown builtin scenario " + name);
}

std::string describe_builtin(const std::string& name) {
  const ScenarioConfig cfg = builtin_scenario(name);
  std::ostringstream os;
  if (name == "fig2-uplink") {
    os << "Two transmitters, one receiver. A1 = 5 every slot, A2 alternates 8, 0.\n"
          "Rates 10 and 8, largest-backlog service, D = 1. All parameters exact.\n";
  } else if (name == "fig6-suspend") {
    os << "One transmitter, one receiver, 10 arrivals per slot, rate 10.\n"
          "Threshold-suspend policy (threshold 10, serve 10), D = 2. All parameters exact.\n";
  } else if (name == "dsa-uplink") {
    os << "Ten transmitters, one receiver, longest connected queue.\n"
          "PLACEHOLDER: Poisson rates 2..6 on transmitters 1-5; periodic sequences with means 2..6 on 6-10;\n"
          "PLACEHOLDER: connection probabilities 0.5..0.9 cycled; rate 100 on connect.\n";
  } else if (name == "lb-downlink") {
    os << "One transmitter, five receivers, join the shortest queue, Poisson(15) arrivals, rate 100 on connect.\n"
          "PLACEHOLDER: connection probability 0.8; services UniformInteger(0, 4/6/8/10/12) (means 2..6).\n";
  } else {
    os << "Five SPs and five INPs, maximum-weight matching in both directions (greedy matching as comparator).\n"
          "PLACEHOLDER: link rates drawn from {0,5,10,20} w.p. {0.1,0.2,0.4,0.3}; Poisson(3) arrivals per entry\n"
          "queue; INP services UniformInteger(0,10).\n";
  }
  os << serialize_scenario(cfg) << '\n';
  return os.str();
}

ScenarioConfig load_scenario(const std::string& source) {
  const auto names = builtin_names();
  ScenarioConfig cfg;
  if (std::find(names.begin(), names.end(), source) != names.end()) {
    cfg = builtin_scenario(source);
  } else {
    std::ifstream f(source);
    if (!f) throw ConfigError("no builtin scenario or readable file named " + source);
    std::stringstream ss;
    ss << f.rdbuf();
    auto parsed = parse_scenario_json(ss.str());
    if (!parsed.schema.ok()) throw ConfigError(parsed.schema.to_string());
    cfg = std::move(parsed.config);
  }
  if (auto rep = validate_config(cfg); !rep.ok()) throw ConfigError(rep.to_string());
  return cfg;
}

void write_trace_table(std::ostream& os, const Trace& trace, std::int64_t slots) {
  if (!trace.records_complete && static_cast<std::int64_t>(trace.records.size()) < slots) {
    throw std::invalid_argument("trace does not hold the requested slots");
  }
  const bool tagged = trace.series.size() > 1;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"t"};
  for (const auto& s : trace.series) {
    const std::string tag = tagged ? (s.plane == Plane::Uplink ? "u." : "d.") : "";
    for (const char* c : {"A", "Q", "Q_rx"}) head.push_back(tag + c);
    if (trace.mode == ControllerMode::UT) {
      head.push_back(tag + "Qe");
      head.push_back(tag + "Qe_rx");
    } else if (trace.mode == ControllerMode::Naive) {
      head.push_back(tag + "Obs");
      head.push_back(tag + "Obs_rx");
    }
    head.push_back(tag + "F");
  }
  cells.push_back(head);
  for (std::int64_t t = 0; t < slots; ++t) {
    const auto& rec = trace.records[static_cast<std::size_t>(t)];
    std::vector<std::string> row{std::to_string(t)};
    for (std::size_t n = 0; n < rec.planes.size(); ++n) {
      const auto& ps = rec.planes[n];
      row.push_back(tuple(ps.a.values()));
      row.push_back(tuple(ps.q.tx.values()));
      row.push_back(tuple(ps.q.rx.values()));
      std::optional<QueueState> extra;
      if (trace.mode == ControllerMode::UT) {
        const auto later = static_cast<std::size_t>(t + trace.delay);
        if (later < trace.records.size()) extra = trace.records[later].planes[n].q_emulated;
      } else if (trace.mode == ControllerMode::Naive) {
        extra = ps.observed;
      }
      if (trace.mode != ControllerMode::Ideal) {
        row.push_back(extra ? tuple(extra->tx.values()) : "-");
        row.push_back(extra ? tuple(extra->rx.values()) : "-");
      }
      row.push_back(tuple(ps.f_requested.link.values()));
    }
    cells.push_back(row);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << "  ";
      if (c + 1 == r.size()) {
        os << r[c];
      } else {
        os << std::left << std::setw(static_cast<int>(width[c])) << r[c] << std::right;
      }
    }
    os << '\n';
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delayed-observation scheduling simulator", "dtsim"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list builtin scenarios");
  std::string describe_name;
  auto* describe = app.add_subcommand("describe", "show a builtin scenario and its placeholders");
  describe->add_option("--scenario", describe_name)->required();

  Overrides run_o;
  std::optional<std::string> trace_out;
  auto* run_cmd = app.add_subcommand("run", "run replications and summarize backlogs");
  run_o.attach(run_cmd, true);
  run_cmd->add_option("--trace-out", trace_out, "write replication 0 as trace CSV");

  Overrides sweep_o;
  sweep_o.format = "csv";
  std::string modes = "ideal,ut,naive";
  std::string delays;
  auto* sweep = app.add_subcommand("sweep", "compare modes across delays");
  sweep_o.attach(sweep, false);
  sweep->add_option("--modes", modes, "comma-separated modes");
  sweep->add_option("--delays", delays, "comma-separated delays")->required();

  Overrides trace_o;
  std::int64_t slots = 10;
  auto* trace = app.add_subcommand("trace", "print the first slots of one replication");
  trace_o.attach(trace, true);
  trace->add_option("--slots", slots, "number of slots to print");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    if (*list) return cmd_list(out);
    if (*describe) {
      out << describe_builtin(describe_name);
      return 0;
    }
    if (*run_cmd) return cmd_run(run_o, trace_out, out, err);
    if (*sweep) return cmd_sweep(sweep_o, modes, delays, out);
    if (*trace) return cmd_trace(trace_o, slots, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

}  // namespace dtsim
