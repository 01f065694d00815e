#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "dtsim/core.hpp"

namespace dtsim {

/// Non-negative integer weights indexed (left node, right node).
using WeightMatrix = Grid;

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // sorted ascending
  friend bool operator==(const Matching&, const Matching&) = default;
};

/// Thrown when an instance exceeds the exact-solver size limit.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultExactMatchingLimit = 16;

Count matching_weight(const WeightMatrix& w, const Matching& m);
bool is_valid_matching(const Matching& m, int rows, int cols);

/// Optimal weight of an assignment (Hungarian method over integers).
Count max_matching_weight(const WeightMatrix& w);

/// Maximum-weight matching. Zero-weight edges are never returned; among all
/// optimal matchings the lexicographically smallest sorted pair list wins.
Matching max_weight_matching(const WeightMatrix& w, int exact_limit = kDefaultExactMatchingLimit);

/// Repeatedly takes the heaviest remaining positive edge (ties: smallest pair).
Matching greedy_maximal_matching(const WeightMatrix& w);

}  // namespace dtsim
