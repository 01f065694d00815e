#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "dtsim/controllers.hpp"
#include "dtsim/core.hpp"
#include "dtsim/dynamics.hpp"

namespace dtsim {

/// One direction's share of a slot.
struct PlaneSlot {
  Plane plane = Plane::Uplink;
  Grid a;       // A(t)
  Grid c;       // C(t)
  Grid b;       // B(t) drawn for the real receivers (downlink)
  Grid b_used;  // realized service min(B, present) (downlink)
  QueueState q;                         // Q(t), before the slot's transfers
  std::optional<QueueState> q_emulated;  // Q^e(t-D) used by UT
  std::optional<QueueState> observed;    // policy input
  Action f_requested;
  ClippedAction f_served;
};

struct SlotRecord {
  std::int64_t t = 0;
  std::vector<PlaneSlot> planes;
};

/// Backlog history of one direction: row t holds Q(t) flattened as
/// [tx(0,0..K-1), tx(1,..), ..., rx(0,..), ...]; row T holds the final state.
struct PlaneSeries {
  Plane plane = Plane::Uplink;
  PlaneShape shape;
  std::vector<Count> values;

  int width() const { return (shape.transmitters + shape.receivers) * shape.classes; }
  int tx_width() const { return shape.transmitters * shape.classes; }
  Count at(std::int64_t t, int column) const {
    return values[static_cast<std::size_t>(t) * width() + column];
  }
  Count total(std::int64_t t) const;
  QueueState state(std::int64_t t) const;
};

struct Trace {
  std::uint64_t config_hash = 0;
  int replication = 0;
  std::int64_t horizon = 0;
  int delay = 0;
  ControllerMode mode = ControllerMode::UT;
  std::vector<PlaneSeries> series;   // one per active direction
  std::vector<SlotRecord> records;   // slot-contiguous from 0, possibly capped
  bool records_complete = true;

  const PlaneSeries& plane(Plane p) const;
  /// Total backlog over all queues and directions at slot t (t == horizon gives the final state).
  Count total(std::int64_t t) const;
};

struct RunOptions {
  /// Real channel at slot t is the channel stream read at t + channel_shift.
  int channel_shift = 0;
  /// Real receiver service at slot t is the service stream read at t + service_shift.
  /// Service reports consumed by UT always come from the unshifted stream.
  int service_shift = 0;
  /// Records beyond this many slots are not kept in memory.
  std::size_t record_cap = std::numeric_limits<std::size_t>::max();
  /// When set, records beyond the cap are streamed here as trace CSV rows.
  std::ostream* spill = nullptr;
};

/// Executes one replication. Throws ConfigError for invalid configs and
/// InvariantViolation (with the slot index) for broken internal contracts.
Trace run(const ScenarioConfig& cfg, int replication, const RunOptions& opts = {});

/// Runs cfg.replications independent replications; replication r depends only
/// on (cfg, r). `threads` = 0 picks the hardware concurrency.
std::vector<Trace> run_replications(const ScenarioConfig& cfg, const RunOptions& opts = {}, unsigned threads = 0);

std::uint64_t config_hash(const ScenarioConfig& cfg);

// Trace CSV: t,a.*,c.*,b.*,q.*,qe.*,f.*,fs.* with 1-based flattened names
// (q.j2.k1). Uplink transmitters are j and receivers i; downlink transmitters
// are i and receivers j; bi-directional columns carry a u./d. direction tag
// (q.u.j1.k1). Sink flows are f.i1.s.k1. Absent values are empty cells.
std::vector<std::string> trace_csv_header(const ScenarioConfig& cfg);
void write_trace_csv_row(std::ostream& os, const SlotRecord& rec, const ScenarioConfig& cfg);
void write_trace_csv(std::ostream& os, const Trace& trace, const ScenarioConfig& cfg);

}  // namespace dtsim
