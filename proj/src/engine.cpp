#include "dtsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <ostream>
#include <thread>

#include "dtsim/processes.hpp"
#include "dtsim/scenario_io.hpp"

namespace dtsim {

Count PlaneSeries::total(std::int64_t t) const {
  Count s = 0;
  for (int c = 0; c < width(); ++c) s += at(t, c);
  return s;
}

QueueState PlaneSeries::state(std::int64_t t) const {
  auto q = QueueState::zeros(shape);
  int c = 0;
  for (auto& v : q.tx.values()) v = at(t, c++);
  for (auto& v : q.rx.values()) v = at(t, c++);
  return q;
}

const PlaneSeries& Trace::plane(Plane p) const {
  for (const auto& s : series) {
    if (s.plane == p) return s;
  }
  throw std::out_of_range("trace has no " + to_string(p) + " series");
}

Count Trace::total(std::int64_t t) const {
  Count s = 0;
  for (const auto& p : series) s += p.total(t);
  return s;
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_scenario(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void append_state(std::vector<Count>& out, const QueueState& q) {
  out.insert(out.end(), q.tx.values().begin(), q.tx.values().end());
  out.insert(out.end(), q.rx.values().begin(), q.rx.values().end());
}

struct PlaneRunner {
  Plane plane;
  PlaneShape shape;
  PlaneProcesses proc;
  Controller controller;
  QueueState q;
};

}  // namespace

Trace run(const ScenarioConfig& cfg, int replication, const RunOptions& opts) {
  if (auto rep = validate_config(cfg); !rep.ok()) throw ConfigError(rep.to_string());

  const std::uint64_t seed = RandomStream::replication_seed(cfg.seed, replication);
  std::vector<PlaneRunner> runners;
  for (Plane p : active_planes(cfg.topology)) {
    const auto shape = plane_shape(cfg.topology, p);
    const auto zero = QueueState::zeros(shape);
    runners.push_back({p, shape, PlaneProcesses(cfg, p, seed),
                       Controller(cfg.controller, cfg.bootstrap, cfg.delay, Policy(policy_for(cfg, p), p), zero),
                       zero});
  }

  Trace trace;
  trace.config_hash = config_hash(cfg);
  trace.replication = replication;
  trace.horizon = cfg.horizon;
  trace.delay = cfg.delay;
  trace.mode = cfg.controller;
  for (const auto& r : runners) {
    PlaneSeries s;
    s.plane = r.plane;
    s.shape = r.shape;
    s.values.reserve(static_cast<std::size_t>(cfg.horizon + 1) * s.width());
    trace.series.push_back(std::move(s));
  }
  trace.records.reserve(std::min<std::size_t>(opts.record_cap, static_cast<std::size_t>(cfg.horizon)));

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    SlotRecord rec;
    rec.t = t;
    try {
      std::vector<SlotInput> inputs(runners.size());
      for (std::size_t n = 0; n < runners.size(); ++n) {
        auto& r = runners[n];
        PlaneSlot ps;
        ps.plane = r.plane;
        ps.a = r.proc.arrivals(t);
        ps.c = r.proc.channels(t + opts.channel_shift);
        ps.q = r.q;
        if (r.plane == Plane::Downlink) ps.b = r.proc.services(t + opts.service_shift);
        rec.planes.push_back(std::move(ps));
      }
      // Service reports always describe the unshifted process.
      std::vector<Grid> reports(runners.size());
      for (std::size_t n = 0; n < runners.size(); ++n) {
        const auto& ps = rec.planes[n];
        if (ps.plane == Plane::Downlink) {
          reports[n] = opts.service_shift == 0 ? ps.b : runners[n].proc.services(t);
        }
        inputs[n] = SlotInput{t, &ps.q, &ps.a, &ps.c, ps.plane == Plane::Downlink ? &reports[n] : nullptr};
      }

      std::vector<Decision> decisions;
      if (runners.size() == 2) {
        auto [up, down] = bidirectional_step(runners[0].controller, runners[1].controller, inputs[0], inputs[1]);
        decisions.push_back(std::move(up));
        decisions.push_back(std::move(down));
      } else {
        decisions.push_back(runners[0].controller.step(inputs[0]));
      }

      for (std::size_t n = 0; n < runners.size(); ++n) {
        auto& r = runners[n];
        auto& ps = rec.planes[n];
        auto& d = decisions[n];
        ps.q_emulated = std::move(d.emulated);
        ps.observed = std::move(d.observed);
        ps.f_requested = std::move(d.requested);
        ps.f_served = clip_action(ps.f_requested, ps.q.tx + ps.a, ps.q.rx);
        if (r.plane == Plane::Uplink) {
          r.q = step_real_uplink(ps.q, ps.a, ps.f_served);
        } else {
          auto step = step_real_downlink(ps.q, ps.a, ps.f_served, ps.b);
          r.q = std::move(step.next);
          ps.b_used = std::move(step.service_used);
        }
        append_state(trace.series[n].values, ps.q);
      }
    } catch (const InvariantViolation& e) {
      throw InvariantViolation(std::string(e.what()) + " (slot " + std::to_string(t) + ")");
    }

    if (trace.records.size() < opts.record_cap) {
      trace.records.push_back(std::move(rec));
    } else {
      trace.records_complete = false;
      if (opts.spill) write_trace_csv_row(*opts.spill, rec, cfg);
    }
  }
  for (std::size_t n = 0; n < runners.size(); ++n) append_state(trace.series[n].values, runners[n].q);
  return trace;
}

std::vector<Trace> run_replications(const ScenarioConfig& cfg, const RunOptions& opts, unsigned threads) {
  if (auto rep = validate_config(cfg); !rep.ok()) throw ConfigError(rep.to_string());
  const int reps = cfg.replications;
  std::vector<Trace> out(static_cast<std::size_t>(reps));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));

  RunOptions local = opts;
  local.spill = nullptr;  // spilled rows from parallel runs would interleave
  if (threads <= 1) {
    for (int r = 0; r < reps; ++r) out[static_cast<std::size_t>(r)] = run(cfg, r, local);
    return out;
  }

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = next++; r < reps; r = next++) out[static_cast<std::size_t>(r)] = run(cfg, r, local);
      } catch (...) {
        errors[w] = std::current_exception();
        next = reps;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV

namespace {

struct Labels {
  std::string tag;  // "", "u." or "d."
  std::string tx;   // "j" (uplink) or "i" (downlink)
  std::string rx;
};

Labels labels_for(const ScenarioConfig& cfg, Plane p) {
  Labels l;
  if (cfg.topology.direction == Direction::Bidirectional) l.tag = p == Plane::Uplink ? "u." : "d.";
  l.tx = p == Plane::Uplink ? "j" : "i";
  l.rx = p == Plane::Uplink ? "i" : "j";
  return l;
}

std::string idx(const std::string& letter, int n) { return letter + std::to_string(n + 1); }

// Visits every column in order; `cell(name, value)` where value may be absent.
using CellFn = std::function<void(const std::string&, std::optional<Count>)>;

void visit_grid(const CellFn& cell, const std::string& prefix, const std::string& row_letter,
                const std::string& col_letter, int rows, int cols, const Grid* g) {
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::optional<Count> v;
      if (g && !g->empty()) v = (*g)(r, c);
      cell(prefix + idx(row_letter, r) + "." + idx(col_letter, c), v);
    }
  }
}

void visit_action(const CellFn& cell, const std::string& prefix, const Labels& l, const PlaneShape& s, Plane p,
                  const Action* a) {
  for (int j = 0; j < s.transmitters; ++j) {
    for (int i = 0; i < s.receivers; ++i) {
      for (int k = 0; k < s.classes; ++k) {
        std::optional<Count> v;
        if (a) v = a->link(j, i, k);
        cell(prefix + idx(l.tx, j) + "." + idx(l.rx, i) + "." + idx("k", k), v);
      }
    }
  }
  if (p != Plane::Uplink) return;
  for (int i = 0; i < s.receivers; ++i) {
    for (int k = 0; k < s.classes; ++k) {
      std::optional<Count> v;
      if (a && !a->sink.empty()) v = a->sink(i, k);
      cell(prefix + idx(l.rx, i) + ".s." + idx("k", k), v);
    }
  }
}

void visit_columns(const ScenarioConfig& cfg, const SlotRecord* rec, const CellFn& cell) {
  const auto planes = active_planes(cfg.topology);
  auto slot_for = [&](std::size_t n) -> const PlaneSlot* { return rec ? &rec->planes[n] : nullptr; };
  auto each = [&](auto&& fn) {
    for (std::size_t n = 0; n < planes.size(); ++n) {
      fn(planes[n], plane_shape(cfg.topology, planes[n]), labels_for(cfg, planes[n]), slot_for(n));
    }
  };
  each([&](Plane, const PlaneShape& s, const Labels& l, const PlaneSlot* ps) {
    visit_grid(cell, "a." + l.tag, l.tx, "k", s.transmitters, s.classes, ps ? &ps->a : nullptr);
  });
  each([&](Plane, const PlaneShape& s, const Labels& l, const PlaneSlot* ps) {
    visit_grid(cell, "c." + l.tag, l.tx, l.rx, s.transmitters, s.receivers, ps ? &ps->c : nullptr);
  });
  each([&](Plane p, const PlaneShape& s, const Labels& l, const PlaneSlot* ps) {
    if (p == Plane::Downlink) visit_grid(cell, "b." + l.tag, l.rx, "k", s.receivers, s.classes, ps ? &ps->b : nullptr);
  });
  for (const char* name : {"q.", "qe."}) {
    const bool emulated = name[1] == 'e';
    each([&](Plane, const PlaneShape& s, const Labels& l, const PlaneSlot* ps) {
      const QueueState* q = nullptr;
      if (ps) q = emulated ? (ps->q_emulated ? &*ps->q_emulated : nullptr) : &ps->q;
      const std::string prefix = std::string(name) + l.tag;
      visit_grid(cell, prefix, l.tx, "k", s.transmitters, s.classes, q ? &q->tx : nullptr);
      visit_grid(cell, prefix, l.rx, "k", s.receivers, s.classes, q ? &q->rx : nullptr);
    });
  }
  each([&](Plane p, const PlaneShape& s, const Labels& l, const PlaneSlot* ps) {
    visit_action(cell, "f." + l.tag, l, s, p, ps ? &ps->f_requested : nullptr);
  });
  each([&](Plane p, const PlaneShape& s, const Labels& l, const PlaneSlot* ps) {
    visit_action(cell, "fs." + l.tag, l, s, p, ps ? &ps->f_served : nullptr);
  });
}

std::string format_count(Count v) { return v >= kUnbounded ? std::string("ClearAll") : std::to_string(v); }

}  // namespace

std::vector<std::string> trace_csv_header(const ScenarioConfig& cfg) {
  std::vector<std::string> out{"t"};
  visit_columns(cfg, nullptr, [&](const std::string& name, std::optional<Count>) { out.push_back(name); });
  return out;
}

void write_trace_csv_row(std::ostream& os, const SlotRecord& rec, const ScenarioConfig& cfg) {
  os << rec.t;
  visit_columns(cfg, &rec, [&](const std::string&, std::optional<Count> v) {
    os << ',';
    if (v) os << format_count(*v);
  });
  os << '\n';
}

void write_trace_csv(std::ostream& os, const Trace& trace, const ScenarioConfig& cfg) {
  const auto header = trace_csv_header(cfg);
  for (std::size_t n = 0; n < header.size(); ++n) os << (n ? "," : "") << header[n];
  os << '\n';
  for (const auto& rec : trace.records) write_trace_csv_row(os, rec, cfg);
}

}  // namespace dtsim
