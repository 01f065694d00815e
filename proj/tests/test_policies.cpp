#include <doctest.h>

#include <random>
#include <tuple>

#include "dtsim/policies.hpp"

using namespace dtsim;

namespace {

QueueState state(int tx, int rx, int k, std::vector<Count> txv, std::vector<Count> rxv) {
  auto q = QueueState::zeros({tx, rx, k});
  q.tx.values() = std::move(txv);
  q.rx.values() = std::move(rxv);
  return q;
}

Grid rates(int rows, int cols, std::vector<Count> v) {
  Grid g(rows, cols);
  g.values() = std::move(v);
  return g;
}

// Largest positive candidate, ties to the smallest (j, k) in scan order.
std::optional<std::tuple<int, int>> argmax_connected(const QueueState& q, const Grid& c, int i, bool connected_only) {
  std::optional<std::tuple<int, int>> best;
  Count best_v = 0;
  for (int j = 0; j < q.tx.rows(); ++j) {
    for (int k = 0; k < q.tx.cols(); ++k) {
      if (connected_only && c(j, i) == 0) continue;
      if (q.tx(j, k) > best_v) {
        best_v = q.tx(j, k);
        best = std::make_tuple(j, k);
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("longest connected queue skips disconnected transmitters") {
  const auto q = state(3, 1, 1, {9, 4, 4}, {0});
  const auto c = rates(3, 1, {0, 3, 5});
  const auto a = lcq(q, c);
  CHECK(a.link(0, 0, 0) == 0);
  CHECK(a.link(1, 0, 0) == 3);  // tie 4/4 goes to transmitter 2 (index 1)
  CHECK(a.link(2, 0, 0) == 0);
  const auto b = largest_backlog(q, c);
  CHECK(b.link(0, 0, 0) == 0);  // rate 0 caps the request
}

TEST_CASE("largest backlog on the two-transmitter example") {
  const auto c = rates(2, 1, {10, 8});
  CHECK(largest_backlog(state(2, 1, 1, {5, 8}, {0}), c).link(1, 0, 0) == 8);
  CHECK(largest_backlog(state(2, 1, 1, {10, 0}, {0}), c).link(0, 0, 0) == 10);
  const auto none = largest_backlog(state(2, 1, 1, {0, 0}, {0}), c);
  CHECK(none.link.values() == std::vector<Count>{0, 0});
}

TEST_CASE("LCQ matches a scan oracle on random inputs") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<Count> backlog(0, 6), rate(0, 4);
  for (int n = 0; n < 500; ++n) {
    const int tx = 1 + n % 4, rx = 1 + (n / 4) % 3, k = 1 + n % 2;
    auto q = QueueState::zeros({tx, rx, k});
    for (auto& v : q.tx.values()) v = backlog(rng);
    Grid c(tx, rx);
    for (auto& v : c.values()) v = rate(rng);
    const auto a = lcq(q, c);
    for (int i = 0; i < rx; ++i) {
      const auto pick = argmax_connected(q, c, i, true);
      for (int j = 0; j < tx; ++j) {
        for (int kk = 0; kk < k; ++kk) {
          Count expect = 0;
          if (pick && std::get<0>(*pick) == j && std::get<1>(*pick) == kk) expect = std::min(q.tx(j, kk), c(j, i));
          CHECK(a.link(j, i, kk) == expect);
        }
      }
    }
  }
}

TEST_CASE("threshold suspend") {
  const auto c = rates(1, 1, {10});
  CHECK(threshold_suspend(state(1, 1, 1, {10}, {0}), c, 10, 10).link(0, 0, 0) == 10);
  CHECK(threshold_suspend(state(1, 1, 1, {20}, {0}), c, 10, 10).link(0, 0, 0) == 0);
  CHECK(threshold_suspend(state(1, 1, 1, {5}, {0}), rates(1, 1, {3}), 10, 10).link(0, 0, 0) == 3);
}

TEST_CASE("join the shortest queue") {
  const auto q = state(1, 4, 1, {7}, {5, 2, 2, 0});
  const auto c = rates(1, 4, {4, 6, 6, 0});
  const auto a = jsq(q, c);
  CHECK(a.link(0, 1, 0) == 6);  // receiver 4 is disconnected, tie 2/2 goes to receiver 2
  CHECK(a.link.values() == std::vector<Count>{0, 6, 0, 0});
  CHECK(a.sink.empty());
  CHECK(jsq(state(1, 2, 1, {0}, {0, 0}), rates(1, 2, {1, 1})).link.values() == std::vector<Count>{0, 0});
}

TEST_CASE("JSQ picks the largest pending class") {
  const auto q = state(1, 2, 2, {3, 9}, {0, 4, 1, 0});
  const auto a = jsq(q, rates(1, 2, {5, 5}));
  CHECK(a.link(0, 0, 1) == 0);
  CHECK(a.link(0, 1, 1) == 5);  // class 2: receiver 2 holds 0 < 4
}

TEST_CASE("matching weights use the backlog difference") {
  const auto q = state(2, 2, 1, {10, 3}, {4, 0});
  const auto c = rates(2, 2, {5, 20, 0, 2});
  const auto w = matching_weights(q, c);
  CHECK(w(0, 0) == 5);   // min(5, 10-4)
  CHECK(w(0, 1) == 10);  // min(20, 10-0)
  CHECK(w(1, 0) == 0);   // disconnected
  CHECK(w(1, 1) == 2);
  const auto a = matching_policy(q, c, PolicyKind::MaxWeightMatch, Plane::Downlink);
  CHECK(a.link(0, 1, 0) == 10);
  CHECK(a.link(1, 1, 0) == 0);
  CHECK(a.link(0, 0, 0) == 0);
}

TEST_CASE("uplink policies emit sink flows") {
  const auto q = state(2, 1, 1, {5, 8}, {3});
  const auto c = rates(2, 1, {10, 8});
  Policy clear({PolicyKind::LargestBacklog, 0, 0, std::nullopt}, Plane::Uplink);
  CHECK(clear(q, c).sink(0, 0) == 11);
  Policy capped({PolicyKind::LargestBacklog, 0, 0, Count{4}}, Plane::Uplink);
  CHECK(capped(q, c).sink(0, 0) == 4);
  Policy down({PolicyKind::MaxWeightMatch, 0, 0, std::nullopt}, Plane::Downlink);
  CHECK(down(q, c).sink.empty());
}
