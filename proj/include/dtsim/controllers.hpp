#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>

#include "dtsim/core.hpp"
#include "dtsim/dynamics.hpp"
#include "dtsim/policies.hpp"

namespace dtsim {

/// What a delayed controller knows at slot t.
struct Observation {
  std::int64_t t = 0;
  Grid c_now;                         // C(t)
  std::optional<Grid> a_delayed;      // A(t-D), present iff t >= D
  std::optional<Grid> b_delayed;      // B(t-D), downlink only
  std::optional<QueueState> q_stale;  // Q(t-D), Naive only
};

/// Controller-side replica of the ideal system, lagging real time by `lag` slots.
struct EmulatedState {
  int lag = 0;
  std::int64_t slot = 0;  // emulated time, t - lag
  QueueState q;
};

/// Remote backlogs delivered so far during the first D slots.
struct PartialInfo {
  QueueState known;  // policy view; undelivered entries are 0
  bool delivered = false;
};

/// Policy input assembled from backlogs and same-slot arrivals: tx = Q + A, rx = Q.
QueueState observed_view(const QueueState& q, const Grid& a);

/// policy(Q(t) + A(t), C(t)) clipped to real availability.
Action ideal_decide(const QueueState& state, const Grid& a_now, const Grid& c_now, const Policy& policy);

/// policy(Q(t-D) + A(t-D), C(t)), clipped to the stale availability it was computed from.
Action naive_decide(const Observation& obs, const Policy& policy);

/// policy(Q^e(t-D) + A(t-D), C(t)), clipped so no flow exceeds emulated availability.
Action ut_decide(const EmulatedState& emu, const Observation& obs, const Policy& policy);

/// Advances the emulated system by one slot. Entry queues (and uplink
/// receivers) carry no clamp, so a negative result throws InvariantViolation;
/// downlink receivers use [.]^+ against the delayed service.
EmulatedState ut_update_emulated(const EmulatedState& emu, const Grid& a_delayed, const Action& f,
                                 const Grid* b_delayed, Plane plane);

/// Decision for t < D.
Action bootstrap_decide(Bootstrap mode, const PartialInfo& info, const Grid& c_now, const Policy& policy);

/// Everything the engine hands a controller for one slot.
struct SlotInput {
  std::int64_t t = 0;
  const QueueState* real = nullptr;  // Q(t)
  const Grid* a_now = nullptr;       // A(t)
  const Grid* c_now = nullptr;       // C(t)
  /// Receiver service reported for slot t (downlink); the controller reads it D slots later.
  const Grid* b_report = nullptr;
};

struct Decision {
  Action requested;
  std::optional<QueueState> emulated;  // Q^e(t-D) the decision used (UT, t >= D)
  std::optional<QueueState> observed;  // the policy input, when one was formed
};

/// One direction's decision maker. Owns the delay buffers and, under UT, the
/// emulated system, which is advanced once per slot right after deciding.
class Controller {
 public:
  Controller(ControllerMode mode, Bootstrap bootstrap, int delay, Policy policy, const QueueState& initial);

  Decision step(const SlotInput& in);

  ControllerMode mode() const { return mode_; }
  Plane plane() const { return policy_.plane(); }
  const EmulatedState& emulated() const { return emu_; }

 private:
  PartialInfo partial_info(const SlotInput& in) const;
  void record_poll(const SlotInput& in);

  ControllerMode mode_;
  Bootstrap bootstrap_;
  int delay_;
  Policy policy_;
  EmulatedState emu_;
  std::deque<Grid> a_hist_;
  std::deque<Grid> b_hist_;
  std::deque<QueueState> q_hist_;
  QueueState polled_;
  std::vector<char> polled_node_;
};

/// One slot of the bi-directional system: uplink first, then downlink, each
/// with its own emulated system on the shared clock.
std::pair<Decision, Decision> bidirectional_step(Controller& uplink, Controller& downlink, const SlotInput& up_in,
                                                 const SlotInput& down_in);

}  // namespace dtsim
