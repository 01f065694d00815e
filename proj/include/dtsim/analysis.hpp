#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dtsim/core.hpp"
#include "dtsim/engine.hpp"

namespace dtsim {

enum class Side { All, Transmitters, Receivers };

/// Which queues and which slots an average covers. `end` defaults to the horizon.
struct QueueSelector {
  std::optional<Plane> plane;
  Side side = Side::All;
  std::optional<int> node;  // restrict to one transmitter/receiver of the chosen side
  std::optional<int> cls;
  std::int64_t begin = 0;
  std::optional<std::int64_t> end;
};

/// (1/|window|) * sum over the window of the selected backlogs.
Rational average_backlog(const Trace& trace, const QueueSelector& sel = {});

struct BacklogSummary {
  std::vector<std::string> queue_names;
  std::vector<Rational> per_queue;         // replication mean of each queue's average
  Rational total;                          // sum of per_queue
  std::vector<Rational> per_replication;   // total average of each replication
  std::vector<std::vector<Rational>> per_replication_queues;
  Rational mean;                           // equals total
  double standard_error = 0.0;
};

/// Summarizes replications over the slot window [begin, end).
BacklogSummary summarize_backlog(const std::vector<Trace>& traces, std::int64_t begin = 0,
                                 std::optional<std::int64_t> end = std::nullopt);

/// Column names of every queue, in series order (e.g. "u.j1.k1").
std::vector<std::string> queue_names(const Trace& trace);

inline constexpr std::int64_t kBeyondHorizon = -1;

struct QueueScan {
  std::vector<std::int64_t> d;  // slots until next empty, kBeyondHorizon if never
  std::vector<std::int64_t> e;  // slots since last empty; t + 1 if never empty so far
};

QueueScan scan_empty(const std::vector<Count>& q);

struct EmptyQueueStats {
  std::vector<std::string> names;
  std::vector<QueueScan> queues;
};

/// d/e for every queue over t in [0, T).
EmptyQueueStats empty_queue_stats(const Trace& trace);

/// D * (sum of long-run arrival rates over every entry queue of every active direction).
Rational theorem_gap_bound(const ScenarioConfig& cfg);

/// Least-squares slope of the total backlog against t over [begin, end).
Rational stability_slope(const Trace& trace, std::int64_t begin, std::optional<std::int64_t> end = std::nullopt);

/// Finite-horizon value of the per-queue gap terms built from d/e and the
/// actions of the first D slots. Needs complete records. A d beyond the
/// horizon is replaced by T - t.
struct GapDiagnostic {
  std::string queue;
  Rational arrival_term;    // (1/T) sum_{t>=D} min(D, d(t)) A(t)
  Rational bootstrap_term;  // (1/T) (net transfers during t < D) d(D)
  Rational overlap_term;    // (1/T) sum_{t>=D} d(t) 1{e(t) <= D} A(t-D)
};
std::vector<GapDiagnostic> finite_gap_diagnostics(const Trace& trace);

struct ComparisonRow {
  ControllerMode mode = ControllerMode::UT;
  int delay = 0;
  BacklogSummary summary;
  std::optional<Rational> gap_bound;  // UT rows
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::int64_t warmup = 0;
};

ComparisonReport compare_modes(const ScenarioConfig& cfg, const std::vector<ControllerMode>& modes,
                               const std::vector<int>& delays, std::int64_t warmup = 0, const RunOptions& opts = {},
                               unsigned threads = 0);

/// `mode,delay,rep,avg_total,<queue averages...>,gap_bound`, one row per replication.
void write_comparison_csv(std::ostream& os, const ComparisonReport& report);
/// Aligned table with one row per (mode, delay): mean, standard error, bound.
void write_comparison_table(std::ostream& os, const ComparisonReport& report);

std::string format_decimal(const Rational& r, int digits = 6);

}  // namespace dtsim
