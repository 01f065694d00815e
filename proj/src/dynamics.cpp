#include "dtsim/dynamics.hpp"

#include <algorithm>

namespace dtsim {

ClippedAction clip_action(const Action& f, const Grid& tx_available, const Grid& rx_backlog) {
  ClippedAction out = f;
  const int n_tx = f.link.transmitters();
  const int n_rx = f.link.receivers();
  const int n_k = f.link.classes();
  for (int j = 0; j < n_tx; ++j) {
    for (int k = 0; k < n_k; ++k) {
      Count left = tx_available(j, k);
      for (int i = 0; i < n_rx; ++i) {
        const Count take = std::clamp<Count>(f.link(j, i, k), 0, left);
        out.link(j, i, k) = take;
        left -= take;
      }
    }
  }
  if (!f.sink.empty()) {
    for (int i = 0; i < n_rx; ++i) {
      for (int k = 0; k < n_k; ++k) {
        Count ready = rx_backlog(i, k);
        for (int j = 0; j < n_tx; ++j) ready += out.link(j, i, k);
        out.sink(i, k) = std::clamp<Count>(f.sink(i, k), 0, ready);
      }
    }
  }
  return out;
}

namespace {

Grid step_transmitters(const Grid& q, const Grid& a_now, const FlowCube& served) {
  Grid next(q.rows(), q.cols());
  for (int j = 0; j < q.rows(); ++j) {
    for (int k = 0; k < q.cols(); ++k) {
      Count out = 0;
      for (int i = 0; i < served.receivers(); ++i) out += served(j, i, k);
      const Count raw = q(j, k) + a_now(j, k) - out;
      if (raw < 0) throw InvariantViolation("transmitter queue would go negative with clipped flows");
      next(j, k) = raw;
    }
  }
  return next;
}

Count inflow(const FlowCube& served, int i, int k) {
  Count in = 0;
  for (int j = 0; j < served.transmitters(); ++j) in += served(j, i, k);
  return in;
}

}  // namespace

QueueState step_real_uplink(const QueueState& state, const Grid& a_now, const ClippedAction& served) {
  QueueState next{step_transmitters(state.tx, a_now, served.link), Grid(state.rx.rows(), state.rx.cols())};
  for (int i = 0; i < state.rx.rows(); ++i) {
    for (int k = 0; k < state.rx.cols(); ++k) {
      const Count out = served.sink.empty() ? 0 : served.sink(i, k);
      const Count raw = state.rx(i, k) + inflow(served.link, i, k) - out;
      if (raw < 0) throw InvariantViolation("receiver queue would go negative with clipped flows");
      next.rx(i, k) = raw;
    }
  }
  return next;
}

DownlinkStep step_real_downlink(const QueueState& state, const Grid& a_now, const ClippedAction& served,
                                const Grid& b_now) {
  DownlinkStep step{{step_transmitters(state.tx, a_now, served.link), Grid(state.rx.rows(), state.rx.cols())},
                    Grid(state.rx.rows(), state.rx.cols())};
  for (int j = 0; j < state.rx.rows(); ++j) {
    for (int k = 0; k < state.rx.cols(); ++k) {
      const Count present = state.rx(j, k) + inflow(served.link, j, k);
      const Count used = std::min(present, b_now(j, k));
      step.service_used(j, k) = used;
      step.next.rx(j, k) = present - used;
    }
  }
  return step;
}

}  // namespace dtsim
