#include "dtsim/matching.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <tuple>

namespace dtsim {

namespace {

// Min-cost perfect assignment on an n x n matrix (potentials + shortest
// augmenting paths). Returns row_of_col.
std::vector<int> hungarian_min(const std::vector<std::vector<Count>>& cost) {
  const int n = static_cast<int>(cost.size());
  constexpr Count kInf = std::numeric_limits<Count>::max() / 4;
  std::vector<Count> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    p[0] = row;
    int j0 = 0;
    std::vector<Count> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      Count delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Count cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_of_col(n, -1);
  for (int j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
  return row_of_col;
}

Count optimum(const std::vector<std::vector<Count>>& w) {
  if (w.empty() || w.front().empty()) return 0;
  const int rows = static_cast<int>(w.size());
  const int cols = static_cast<int>(w.front().size());
  const int n = std::max(rows, cols);
  std::vector<std::vector<Count>> cost(n, std::vector<Count>(n, 0));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) cost[r][c] = -w[r][c];
  }
  const auto row_of_col = hungarian_min(cost);
  Count total = 0;
  for (int c = 0; c < n; ++c) total -= cost[row_of_col[c]][c];
  return total;
}

// Weights of rows [first_row, R) restricted to the allowed columns.
std::vector<std::vector<Count>> submatrix(const WeightMatrix& w, int first_row, const std::vector<char>& col_ok) {
  std::vector<std::vector<Count>> out;
  for (int r = first_row; r < w.rows(); ++r) {
    std::vector<Count> row;
    for (int c = 0; c < w.cols(); ++c) {
      if (col_ok[c]) row.push_back(w(r, c));
    }
    if (!row.empty()) out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

Count matching_weight(const WeightMatrix& w, const Matching& m) {
  Count total = 0;
  for (auto [a, b] : m.pairs) total += w(a, b);
  return total;
}

bool is_valid_matching(const Matching& m, int rows, int cols) {
  std::vector<char> left(rows, 0), right(cols, 0);
  for (auto [a, b] : m.pairs) {
    if (a < 0 || a >= rows || b < 0 || b >= cols) return false;
    if (left[a]++ || right[b]++) return false;
  }
  return true;
}

Count max_matching_weight(const WeightMatrix& w) {
  return optimum(submatrix(w, 0, std::vector<char>(w.cols(), 1)));
}

Matching max_weight_matching(const WeightMatrix& w, int exact_limit) {
  if (w.rows() > exact_limit || w.cols() > exact_limit) {
    throw CapabilityError("matching instance " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                          " exceeds the exact-solve limit of " + std::to_string(exact_limit) +
                          "; use greedy_maximal_matching");
  }
  Matching m;
  const Count best = max_matching_weight(w);
  std::vector<char> col_free(w.cols(), 1);
  Count acc = 0;
  // Fix pairs row by row, taking the smallest column that still admits an
  // optimal completion using only later rows.
  for (int a = 0; a < w.rows() && acc < best; ++a) {
    for (int b = 0; b < w.cols(); ++b) {
      if (!col_free[b] || w(a, b) <= 0) continue;
      col_free[b] = 0;
      const Count rest = optimum(submatrix(w, a + 1, col_free));
      if (acc + w(a, b) + rest == best) {
        acc += w(a, b);
        m.pairs.emplace_back(a, b);
        break;
      }
      col_free[b] = 1;
    }
  }
  return m;
}

Matching greedy_maximal_matching(const WeightMatrix& w) {
  std::vector<std::tuple<Count, int, int>> edges;
  for (int a = 0; a < w.rows(); ++a) {
    for (int b = 0; b < w.cols(); ++b) {
      if (w(a, b) > 0) edges.emplace_back(-w(a, b), a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  std::vector<char> left(w.rows(), 0), right(w.cols(), 0);
  Matching m;
  for (auto [neg, a, b] : edges) {
    if (left[a] || right[b]) continue;
    left[a] = right[b] = 1;
    m.pairs.emplace_back(a, b);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  return m;
}

}  // namespace dtsim
