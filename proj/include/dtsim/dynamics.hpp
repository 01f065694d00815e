#pragma once

#include "dtsim/core.hpp"

namespace dtsim {

/// Realized transfers; same layout as Action.
using ClippedAction = Action;

/// Cuts requests down to available packets. Each transmitter queue offers
/// `tx_available` (backlog plus this slot's arrivals) to receivers in ascending
/// index order. Uplink sink flows are then cut to the receiver backlog plus the
/// packets it received this slot.
ClippedAction clip_action(const Action& f, const Grid& tx_available, const Grid& rx_backlog);

/// Uplink queue update with clipped transfers:
///   Q_jk <- [Q_jk + A_jk - sum_i F_jik]^+,  Q_ik <- [Q_ik + sum_j F_jik - F_isk]^+.
/// With clipped inputs the [.]^+ never binds; a binding clamp throws InvariantViolation.
QueueState step_real_uplink(const QueueState& state, const Grid& a_now, const ClippedAction& served);

struct DownlinkStep {
  QueueState next;
  Grid service_used;  // min(B, packets present), i.e. the realized service
};

/// Downlink queue update: transmitters as in the uplink case, receivers
///   Q_jk <- [Q_jk + sum_i F_ijk - B_jk]^+ (the clamp is genuine here).
DownlinkStep step_real_downlink(const QueueState& state, const Grid& a_now, const ClippedAction& served,
                                const Grid& b_now);

}  // namespace dtsim
