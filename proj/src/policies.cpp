#include "dtsim/policies.hpp"

#include <algorithm>

namespace dtsim {

namespace {

PlaneShape shape_of(const QueueState& q) { return {q.tx.rows(), q.rx.rows(), q.tx.cols()}; }

// Per receiver: pick the (transmitter, class) with the largest positive backlog
// among candidates; request min(backlog, rate).
Action serve_largest(const QueueState& observed, const Grid& rates, bool connected_only) {
  const auto shape = shape_of(observed);
  Action a = Action::zeros(shape, Plane::Uplink);
  for (int i = 0; i < shape.receivers; ++i) {
    int best_j = -1, best_k = -1;
    Count best = 0;
    for (int j = 0; j < shape.transmitters; ++j) {
      if (connected_only && rates(j, i) <= 0) continue;
      for (int k = 0; k < shape.classes; ++k) {
        if (observed.tx(j, k) > best) {
          best = observed.tx(j, k);
          best_j = j;
          best_k = k;
        }
      }
    }
    if (best_j >= 0) a.link(best_j, i, best_k) = std::min(best, rates(best_j, i));
  }
  return a;
}

}  // namespace

Action lcq(const QueueState& observed, const Grid& rates) { return serve_largest(observed, rates, true); }

Action largest_backlog(const QueueState& observed, const Grid& rates) {
  return serve_largest(observed, rates, false);
}

Action threshold_suspend(const QueueState& observed, const Grid& rates, Count threshold, Count serve) {
  const auto shape = shape_of(observed);
  Action a = Action::zeros(shape, Plane::Uplink);
  for (int j = 0; j < shape.transmitters; ++j) {
    for (int i = 0; i < shape.receivers; ++i) {
      for (int k = 0; k < shape.classes; ++k) {
        if (observed.tx(j, k) <= threshold) a.link(j, i, k) = std::min(serve, rates(j, i));
      }
    }
  }
  return a;
}

Action jsq(const QueueState& observed, const Grid& rates) {
  const auto shape = shape_of(observed);
  Action a = Action::zeros(shape, Plane::Downlink);
  for (int i = 0; i < shape.transmitters; ++i) {
    int k = 0;
    for (int c = 1; c < shape.classes; ++c) {
      if (observed.tx(i, c) > observed.tx(i, k)) k = c;
    }
    const Count pending = observed.tx(i, k);
    if (pending <= 0) continue;
    int target = -1;
    for (int j = 0; j < shape.receivers; ++j) {
      if (rates(i, j) <= 0) continue;
      if (target < 0 || observed.rx(j, k) < observed.rx(target, k)) target = j;
    }
    if (target >= 0) a.link(i, target, k) = std::min(pending, rates(i, target));
  }
  return a;
}

WeightMatrix matching_weights(const QueueState& observed, const Grid& rates, std::vector<int>* best_class) {
  const auto shape = shape_of(observed);
  WeightMatrix w(shape.transmitters, shape.receivers);
  if (best_class) best_class->assign(static_cast<std::size_t>(shape.transmitters) * shape.receivers, 0);
  for (int a = 0; a < shape.transmitters; ++a) {
    for (int b = 0; b < shape.receivers; ++b) {
      if (rates(a, b) <= 0) continue;
      int k_best = 0;
      Count diff_best = observed.tx(a, 0) - observed.rx(b, 0);
      for (int k = 1; k < shape.classes; ++k) {
        const Count diff = observed.tx(a, k) - observed.rx(b, k);
        if (diff > diff_best) {
          diff_best = diff;
          k_best = k;
        }
      }
      w(a, b) = std::max<Count>(0, std::min(rates(a, b), diff_best));
      if (best_class) (*best_class)[static_cast<std::size_t>(a) * shape.receivers + b] = k_best;
    }
  }
  return w;
}

Action matching_policy(const QueueState& observed, const Grid& rates, PolicyKind kind, Plane plane) {
  const auto shape = shape_of(observed);
  std::vector<int> best_class;
  const auto w = matching_weights(observed, rates, &best_class);
  const Matching m =
      kind == PolicyKind::GreedyMatch ? greedy_maximal_matching(w) : max_weight_matching(w);
  Action a = Action::zeros(shape, plane);
  for (auto [tx, rx] : m.pairs) {
    const int k = best_class[static_cast<std::size_t>(tx) * shape.receivers + rx];
    a.link(tx, rx, k) = std::min(observed.tx(tx, k), rates(tx, rx));
  }
  return a;
}

Action Policy::operator()(const QueueState& observed, const Grid& rates) const {
  Action a;
  switch (spec_.kind) {
    case PolicyKind::LCQ: a = lcq(observed, rates); break;
    case PolicyKind::LargestBacklog: a = largest_backlog(observed, rates); break;
    case PolicyKind::ThresholdSuspend: a = threshold_suspend(observed, rates, spec_.threshold, spec_.serve); break;
    case PolicyKind::JSQ: a = jsq(observed, rates); break;
    case PolicyKind::MaxWeightMatch:
    case PolicyKind::GreedyMatch: a = matching_policy(observed, rates, spec_.kind, plane_); break;
  }
  if (plane_ == Plane::Uplink) {
    const auto shape = shape_of(observed);
    for (int i = 0; i < shape.receivers; ++i) {
      for (int k = 0; k < shape.classes; ++k) {
        Count inflow = 0;
        for (int j = 0; j < shape.transmitters; ++j) inflow += a.link(j, i, k);
        const Count ready = observed.rx(i, k) + inflow;
        a.sink(i, k) = spec_.sink_rate ? std::min(*spec_.sink_rate, ready) : ready;
      }
    }
  }
  return a;
}

}  // namespace dtsim
