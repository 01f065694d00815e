#include "dtsim/controllers.hpp"

#include <string>

namespace dtsim {

QueueState observed_view(const QueueState& q, const Grid& a) { return {q.tx + a, q.rx}; }

namespace {

Action decide_on(const QueueState& view, const Grid& c_now, const Policy& policy) {
  return clip_action(policy(view, c_now), view.tx, view.rx);
}

}  // namespace

Action ideal_decide(const QueueState& state, const Grid& a_now, const Grid& c_now, const Policy& policy) {
  return decide_on(observed_view(state, a_now), c_now, policy);
}

Action naive_decide(const Observation& obs, const Policy& policy) {
  if (!obs.q_stale || !obs.a_delayed) throw std::invalid_argument("naive_decide needs Q(t-D) and A(t-D)");
  return decide_on(observed_view(*obs.q_stale, *obs.a_delayed), obs.c_now, policy);
}

Action ut_decide(const EmulatedState& emu, const Observation& obs, const Policy& policy) {
  if (!obs.a_delayed) throw std::invalid_argument("ut_decide needs A(t-D)");
  return decide_on(observed_view(emu.q, *obs.a_delayed), obs.c_now, policy);
}

EmulatedState ut_update_emulated(const EmulatedState& emu, const Grid& a_delayed, const Action& f,
                                 const Grid* b_delayed, Plane plane) {
  EmulatedState next = emu;
  ++next.slot;
  const auto& link = f.link;
  for (int j = 0; j < emu.q.tx.rows(); ++j) {
    for (int k = 0; k < emu.q.tx.cols(); ++k) {
      Count out = 0;
      for (int i = 0; i < link.receivers(); ++i) out += link(j, i, k);
      const Count v = emu.q.tx(j, k) + a_delayed(j, k) - out;
      if (v < 0) {
        throw InvariantViolation("emulated transmitter " + std::to_string(j + 1) + " went negative at emulated slot " +
                                 std::to_string(emu.slot));
      }
      next.q.tx(j, k) = v;
    }
  }
  for (int i = 0; i < emu.q.rx.rows(); ++i) {
    for (int k = 0; k < emu.q.rx.cols(); ++k) {
      Count in = 0;
      for (int j = 0; j < link.transmitters(); ++j) in += link(j, i, k);
      if (plane == Plane::Uplink) {
        const Count v = emu.q.rx(i, k) + in - (f.sink.empty() ? 0 : f.sink(i, k));
        if (v < 0) {
          throw InvariantViolation("emulated receiver " + std::to_string(i + 1) +
                                   " went negative at emulated slot " + std::to_string(emu.slot));
        }
        next.q.rx(i, k) = v;
      } else {
        if (!b_delayed) throw std::invalid_argument("downlink emulated update needs B(t-D)");
        const Count present = emu.q.rx(i, k) + in;
        const Count b = (*b_delayed)(i, k);
        next.q.rx(i, k) = b >= present ? 0 : present - b;
      }
    }
  }
  return next;
}

Action bootstrap_decide(Bootstrap mode, const PartialInfo& info, const Grid& c_now, const Policy& policy) {
  const PlaneShape shape{info.known.tx.rows(), info.known.rx.rows(), info.known.tx.cols()};
  if (mode == Bootstrap::Idle || !info.delivered) return Action::zeros(shape, policy.plane());
  return decide_on(info.known, c_now, policy);
}

Controller::Controller(ControllerMode mode, Bootstrap bootstrap, int delay, Policy policy, const QueueState& initial)
    : mode_(mode),
      bootstrap_(bootstrap),
      delay_(delay),
      policy_(policy),
      emu_{delay, 0, initial},
      polled_(QueueState::zeros({initial.tx.rows(), initial.rx.rows(), initial.tx.cols()})) {
  // Remote nodes: uplink transmitters, downlink receivers.
  const int remote = policy_.plane() == Plane::Uplink ? initial.tx.rows() : initial.rx.rows();
  polled_node_.assign(static_cast<std::size_t>(remote), 0);
}

// Cyclic observation schedule: the node polled at slot tau is tau mod
// (#remote nodes); its snapshot is delivered at tau + 1. Local queues are
// always known exactly.
PartialInfo Controller::partial_info(const SlotInput& in) const {
  PartialInfo info;
  info.known = polled_;
  if (policy_.plane() == Plane::Uplink) {
    info.known.rx = in.real->rx;
  } else {
    info.known.tx = in.real->tx + *in.a_now;
  }
  for (char p : polled_node_) info.delivered = info.delivered || p;
  return info;
}

void Controller::record_poll(const SlotInput& in) {
  const int n = static_cast<int>(polled_node_.size());
  const int node = static_cast<int>(in.t % n);
  polled_node_[static_cast<std::size_t>(node)] = 1;
  if (policy_.plane() == Plane::Uplink) {
    for (int k = 0; k < polled_.tx.cols(); ++k) polled_.tx(node, k) = in.real->tx(node, k) + (*in.a_now)(node, k);
  } else {
    for (int k = 0; k < polled_.rx.cols(); ++k) polled_.rx(node, k) = in.real->rx(node, k);
  }
}

Decision Controller::step(const SlotInput& in) {
  Decision d;
  if (mode_ == ControllerMode::Ideal) {
    d.observed = observed_view(*in.real, *in.a_now);
    d.requested = clip_action(policy_(*d.observed, *in.c_now), d.observed->tx, d.observed->rx);
    return d;
  }

  const auto keep = static_cast<std::size_t>(delay_) + 1;
  a_hist_.push_back(*in.a_now);
  if (a_hist_.size() > keep) a_hist_.pop_front();
  if (mode_ == ControllerMode::Naive) {
    q_hist_.push_back(*in.real);
    if (q_hist_.size() > keep) q_hist_.pop_front();
  }
  if (policy_.plane() == Plane::Downlink && mode_ == ControllerMode::UT) {
    if (!in.b_report) throw std::invalid_argument("downlink controller needs service reports");
    b_hist_.push_back(*in.b_report);
    if (b_hist_.size() > keep) b_hist_.pop_front();
  }

  if (in.t < delay_) {
    const auto info = partial_info(in);
    d.requested = bootstrap_decide(bootstrap_, info, *in.c_now, policy_);
    if (bootstrap_ == Bootstrap::ActOnAvailable && info.delivered) d.observed = info.known;
    record_poll(in);
    return d;
  }

  Observation obs;
  obs.t = in.t;
  obs.c_now = *in.c_now;
  obs.a_delayed = a_hist_.front();
  if (mode_ == ControllerMode::Naive) {
    obs.q_stale = q_hist_.front();
    d.requested = naive_decide(obs, policy_);
    d.observed = observed_view(*obs.q_stale, *obs.a_delayed);
    return d;
  }

  if (!b_hist_.empty()) obs.b_delayed = b_hist_.front();
  d.emulated = emu_.q;
  d.observed = observed_view(emu_.q, *obs.a_delayed);
  d.requested = ut_decide(emu_, obs, policy_);
  emu_ = ut_update_emulated(emu_, *obs.a_delayed, d.requested, obs.b_delayed ? &*obs.b_delayed : nullptr,
                            policy_.plane());
  return d;
}

std::pair<Decision, Decision> bidirectional_step(Controller& uplink, Controller& downlink, const SlotInput& up_in,
                                                 const SlotInput& down_in) {
  auto up = uplink.step(up_in);
  auto down = downlink.step(down_in);
  return {std::move(up), std::move(down)};
}

}  // namespace dtsim
