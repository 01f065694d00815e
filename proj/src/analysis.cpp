#include "dtsim/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dtsim {

namespace {

using Wide = __int128;

struct Column {
  std::size_t series;
  int column;
  bool is_tx;
  int node;
  int cls;
};

std::vector<Column> columns_of(const Trace& trace) {
  std::vector<Column> out;
  for (std::size_t s = 0; s < trace.series.size(); ++s) {
    const auto& ps = trace.series[s];
    const int k = ps.shape.classes;
    for (int c = 0; c < ps.width(); ++c) {
      const bool tx = c < ps.tx_width();
      const int local = tx ? c : c - ps.tx_width();
      out.push_back({s, c, tx, local / k, local % k});
    }
  }
  return out;
}

bool selected(const Trace& trace, const Column& col, const QueueSelector& sel) {
  if (sel.plane && trace.series[col.series].plane != *sel.plane) return false;
  if (sel.side == Side::Transmitters && !col.is_tx) return false;
  if (sel.side == Side::Receivers && col.is_tx) return false;
  if (sel.node && col.node != *sel.node) return false;
  if (sel.cls && col.cls != *sel.cls) return false;
  return true;
}

std::int64_t window_end(const Trace& trace, std::optional<std::int64_t> end) { return end.value_or(trace.horizon); }

void check_window(const Trace& trace, std::int64_t begin, std::int64_t end) {
  if (begin < 0 || end > trace.horizon || begin >= end) {
    throw std::invalid_argument("window [" + std::to_string(begin) + "," + std::to_string(end) +
                                ") is empty or outside [0," + std::to_string(trace.horizon) + ")");
  }
}

Count column_sum(const Trace& trace, const Column& col, std::int64_t begin, std::int64_t end) {
  const auto& ps = trace.series[col.series];
  Count s = 0;
  for (std::int64_t t = begin; t < end; ++t) s += ps.at(t, col.column);
  return s;
}

std::int64_t to_int64(Wide v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("exact slope does not fit in 64 bits");
  }
  return static_cast<std::int64_t>(v);
}

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide r = a % b;
    a = b;
    b = r;
  }
  return a;
}

std::int64_t resolved_d(const QueueScan& scan, std::int64_t t, std::int64_t horizon) {
  return scan.d[static_cast<std::size_t>(t)] == kBeyondHorizon ? horizon - t : scan.d[static_cast<std::size_t>(t)];
}

}  // namespace

std::vector<std::string> queue_names(const Trace& trace) {
  std::vector<std::string> out;
  const bool tagged = trace.series.size() > 1;
  for (const auto& col : columns_of(trace)) {
    const Plane p = trace.series[col.series].plane;
    std::string name = tagged ? (p == Plane::Uplink ? "u." : "d.") : "";
    const bool j_letter = (p == Plane::Uplink) == col.is_tx;
    name += (j_letter ? "j" : "i") + std::to_string(col.node + 1) + ".k" + std::to_string(col.cls + 1);
    out.push_back(name);
  }
  return out;
}

Rational average_backlog(const Trace& trace, const QueueSelector& sel) {
  const auto end = window_end(trace, sel.end);
  check_window(trace, sel.begin, end);
  Count s = 0;
  for (const auto& col : columns_of(trace)) {
    if (selected(trace, col, sel)) s += column_sum(trace, col, sel.begin, end);
  }
  return Rational(s, end - sel.begin);
}

BacklogSummary summarize_backlog(const std::vector<Trace>& traces, std::int64_t begin,
                                 std::optional<std::int64_t> end) {
  if (traces.empty()) throw std::invalid_argument("no traces to summarize");
  BacklogSummary out;
  out.queue_names = queue_names(traces.front());
  const auto cols = columns_of(traces.front());
  out.per_queue.assign(cols.size(), Rational(0));
  for (const auto& tr : traces) {
    const auto e = window_end(tr, end);
    check_window(tr, begin, e);
    std::vector<Rational> qs;
    Count total = 0;
    for (const auto& col : cols) {
      const Count s = column_sum(tr, col, begin, e);
      total += s;
      qs.emplace_back(s, e - begin);
    }
    for (std::size_t n = 0; n < qs.size(); ++n) out.per_queue[n] += qs[n];
    out.per_replication.emplace_back(total, e - begin);
    out.per_replication_queues.push_back(std::move(qs));
  }
  const auto n = static_cast<std::int64_t>(traces.size());
  for (auto& q : out.per_queue) q /= n;
  out.total = std::accumulate(out.per_queue.begin(), out.per_queue.end(), Rational(0));
  out.mean = std::accumulate(out.per_replication.begin(), out.per_replication.end(), Rational(0)) / n;
  if (n > 1) {
    const double m = to_double(out.mean);
    double ss = 0;
    for (const auto& r : out.per_replication) ss += (to_double(r) - m) * (to_double(r) - m);
    out.standard_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return out;
}

QueueScan scan_empty(const std::vector<Count>& q) {
  QueueScan s;
  const auto n = static_cast<std::int64_t>(q.size());
  s.d.assign(q.size(), 0);
  s.e.assign(q.size(), 0);
  std::int64_t last = -1;
  for (std::int64_t t = 0; t < n; ++t) {
    if (q[static_cast<std::size_t>(t)] == 0) last = t;
    s.e[static_cast<std::size_t>(t)] = t - last;
  }
  std::int64_t next = kBeyondHorizon;
  for (std::int64_t t = n - 1; t >= 0; --t) {
    if (q[static_cast<std::size_t>(t)] == 0) next = t;
    s.d[static_cast<std::size_t>(t)] = next == kBeyondHorizon ? kBeyondHorizon : next - t;
  }
  return s;
}

EmptyQueueStats empty_queue_stats(const Trace& trace) {
  EmptyQueueStats out;
  out.names = queue_names(trace);
  for (const auto& col : columns_of(trace)) {
    const auto& ps = trace.series[col.series];
    std::vector<Count> seq(static_cast<std::size_t>(trace.horizon));
    for (std::int64_t t = 0; t < trace.horizon; ++t) seq[static_cast<std::size_t>(t)] = ps.at(t, col.column);
    out.queues.push_back(scan_empty(seq));
  }
  return out;
}

Rational theorem_gap_bound(const ScenarioConfig& cfg) {
  const auto planes = active_planes(cfg.topology);
  Rational sum(0);
  for (const auto& e : cfg.arrivals) {
    if (std::find(planes.begin(), planes.end(), e.plane) != planes.end()) sum += arrival_rate_upper_bound(e.spec);
  }
  return sum * cfg.delay;
}

Rational stability_slope(const Trace& trace, std::int64_t begin, std::optional<std::int64_t> end) {
  const auto e = window_end(trace, end);
  if (begin < 0 || e > trace.horizon || e - begin < 2) {
    throw std::invalid_argument("stability_slope needs a window of at least 2 slots inside the horizon");
  }
  Wide n = e - begin, st = 0, sy = 0, sty = 0, stt = 0;
  for (std::int64_t t = begin; t < e; ++t) {
    const Wide y = trace.total(t);
    st += t;
    sy += y;
    sty += y * t;
    stt += Wide(t) * t;
  }
  Wide num = n * sty - st * sy;
  Wide den = n * stt - st * st;
  const Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(to_int64(num), to_int64(den));
}

std::vector<GapDiagnostic> finite_gap_diagnostics(const Trace& trace) {
  if (!trace.records_complete || static_cast<std::int64_t>(trace.records.size()) != trace.horizon) {
    throw std::invalid_argument("gap diagnostics need the complete slot records");
  }
  const std::int64_t T = trace.horizon;
  const std::int64_t D = trace.delay;
  const auto stats = empty_queue_stats(trace);
  const auto cols = columns_of(trace);
  std::vector<GapDiagnostic> out;
  for (std::size_t q = 0; q < cols.size(); ++q) {
    const auto& col = cols[q];
    const auto& scan = stats.queues[q];
    const Plane plane = trace.series[col.series].plane;
    auto slot = [&](std::int64_t t) -> const PlaneSlot& {
      return trace.records[static_cast<std::size_t>(t)].planes[col.series];
    };
    Count arrival = 0, boot = 0, overlap = 0;
    if (D < T) {
      Count net = 0;
      for (std::int64_t t = 0; t < D; ++t) {
        const auto& f = slot(t).f_served.link;
        if (col.is_tx) {
          for (int i = 0; i < f.receivers(); ++i) net += f(col.node, i, col.cls);
        } else {
          for (int j = 0; j < f.transmitters(); ++j) net += f(j, col.node, col.cls);
          if (plane == Plane::Uplink) {
            net -= slot(t).f_served.sink(col.node, col.cls);
          } else {
            net -= slot(t).b_used(col.node, col.cls);
          }
        }
      }
      boot = net * resolved_d(scan, D, T);
    }
    if (col.is_tx) {
      for (std::int64_t t = D; t < T; ++t) {
        const std::int64_t d = resolved_d(scan, t, T);
        arrival += std::min(D, d) * slot(t).a(col.node, col.cls);
        if (scan.e[static_cast<std::size_t>(t)] <= D) overlap += d * slot(t - D).a(col.node, col.cls);
      }
    }
    out.push_back({stats.names[q], Rational(arrival, T), Rational(boot, T), Rational(overlap, T)});
  }
  return out;
}

ComparisonReport compare_modes(const ScenarioConfig& cfg, const std::vector<ControllerMode>& modes,
                               const std::vector<int>& delays, std::int64_t warmup, const RunOptions& opts,
                               unsigned threads) {
  ComparisonReport report;
  report.warmup = warmup;
  for (int delay : delays) {
    for (ControllerMode mode : modes) {
      ScenarioConfig c = cfg;
      c.delay = delay;
      c.controller = mode;
      ComparisonRow row;
      row.mode = mode;
      row.delay = delay;
      row.summary = summarize_backlog(run_replications(c, opts, threads), warmup);
      if (mode == ControllerMode::UT) row.gap_bound = theorem_gap_bound(c);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string format_decimal(const Rational& r, int digits) {
  Wide scale = 1;
  for (int n = 0; n < digits; ++n) scale *= 10;
  Wide num = r.numerator();
  const Wide den = r.denominator();
  const bool negative = num < 0;
  if (negative) num = -num;
  Wide scaled = (num * scale * 2 + den) / (den * 2);  // round half up
  const Wide whole = scaled / scale;
  Wide frac = scaled % scale;
  std::string out = negative && scaled != 0 ? "-" : "";
  out += std::to_string(static_cast<std::int64_t>(whole));
  if (digits > 0) {
    std::string f = std::to_string(static_cast<std::int64_t>(frac));
    out += "." + std::string(static_cast<std::size_t>(digits) - f.size(), '0') + f;
  }
  return out;
}

void write_comparison_csv(std::ostream& os, const ComparisonReport& report) {
  os << "mode,delay,rep,avg_total";
  const auto& names = report.rows.empty() ? std::vector<std::string>{} : report.rows.front().summary.queue_names;
  for (const auto& n : names) os << ",avg." << n;
  os << ",gap_bound\n";
  for (const auto& row : report.rows) {
    const auto& s = row.summary;
    for (std::size_t r = 0; r < s.per_replication.size(); ++r) {
      os << to_string(row.mode) << ',' << row.delay << ',' << r << ',' << format_decimal(s.per_replication[r]);
      for (const auto& q : s.per_replication_queues[r]) os << ',' << format_decimal(q);
      os << ',';
      if (row.gap_bound) os << format_decimal(*row.gap_bound);
      os << '\n';
    }
  }
}

void write_comparison_table(std::ostream& os, const ComparisonReport& report) {
  std::vector<std::vector<std::string>> cells{{"mode", "delay", "reps", "mean", "se", "gap_bound"}};
  for (const auto& row : report.rows) {
    std::ostringstream se;
    se << std::fixed << std::setprecision(6) << row.summary.standard_error;
    cells.push_back({to_string(row.mode), std::to_string(row.delay),
                     std::to_string(row.summary.per_replication.size()), format_decimal(row.summary.mean), se.str(),
                     row.gap_bound ? format_decimal(*row.gap_bound) : "-"});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << "  ";
      os << std::setw(static_cast<int>(width[c])) << r[c];
    }
    os << '\n';
  }
}

}  // namespace dtsim
