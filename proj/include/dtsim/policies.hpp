#pragma once

#include "dtsim/core.hpp"
#include "dtsim/matching.hpp"

namespace dtsim {

// Scheduling policies: (observed backlogs, channel rates) -> requested Action.
// `observed.tx` is transmitter backlog plus this slot's arrivals, `observed.rx`
// the receiver backlog, `rates` is (transmitter, receiver). All ties break
// toward the smallest index.

/// Uplink: each receiver serves its connected transmitter queue with the largest backlog.
Action lcq(const QueueState& observed, const Grid& rates);

/// Uplink: like lcq but without the connectivity filter.
Action largest_backlog(const QueueState& observed, const Grid& rates);

/// Uplink, one transmitter-receiver pair: request `serve` (capped by rate)
/// while the observed backlog is <= threshold, nothing otherwise.
Action threshold_suspend(const QueueState& observed, const Grid& rates, Count threshold, Count serve);

/// Downlink: each transmitter dispatches its pending packets to the connected
/// receiver with the smallest backlog.
Action jsq(const QueueState& observed, const Grid& rates);

/// Either direction: pair transmitters and receivers by weight
/// max(0, min(rate, sender backlog - receiver backlog)) over connected links,
/// then move min(sender backlog, rate) along every matched pair.
Action matching_policy(const QueueState& observed, const Grid& rates, PolicyKind kind, Plane plane);

/// Weight matrix used by matching_policy; `best_class` receives the class chosen per link.
WeightMatrix matching_weights(const QueueState& observed, const Grid& rates, std::vector<int>* best_class = nullptr);

/// A policy bound to one direction. For uplink it also emits the receiver-to-sink
/// flows: min(sink_rate, observed receiver backlog + requested inflow), or the
/// whole amount when no sink rate is configured.
class Policy {
 public:
  Policy(PolicySpec spec, Plane plane) : spec_(spec), plane_(plane) {}

  Action operator()(const QueueState& observed, const Grid& rates) const;

  const PolicySpec& spec() const { return spec_; }
  Plane plane() const { return plane_; }

 private:
  PolicySpec spec_;
  Plane plane_;
};

}  // namespace dtsim
