#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "lfd/common.hpp"
#include "lfd/grid.hpp"

namespace lfd {

// Minimum-total-cost one-to-one assignment on a rectangular cost matrix
// (rows x cols), Hungarian method with potentials on the square-padded
// matrix (dummy entries cost 0, so they absorb the unmatched side).
// Returns, for each row, the assigned column or -1.
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  const int cols = rows > 0 ? static_cast<int>(cost[0].size()) : 0;
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
  const int n = std::max(rows, cols);

  auto at = [&](int i, int j) -> double {
    return (i < rows && j < cols) ? cost[i][j] : 0.0;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
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
    } while (j0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j];
    if (i >= 1 && i <= rows && j <= cols) row_to_col[i - 1] = j - 1;
  }
  return row_to_col;
}

// Optimal assignment between expert and predicted placements, then pairs
// farther apart than eps are discarded. Pair order follows the expert index.
inline std::vector<std::pair<int, int>> match_placements(
    const std::vector<GridPoint>& expert, const std::vector<GridPoint>& predicted,
    double eps) {
  std::vector<std::pair<int, int>> matches;
  if (expert.empty() || predicted.empty()) return matches;
  std::vector<std::vector<double>> cost(expert.size(),
                                        std::vector<double>(predicted.size(), 0.0));
  for (size_t i = 0; i < expert.size(); ++i)
    for (size_t j = 0; j < predicted.size(); ++j)
      cost[i][j] = distance(expert[i], predicted[j]);
  const std::vector<int> row_to_col = min_cost_assignment(cost);
  for (size_t i = 0; i < expert.size(); ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && cost[i][j] <= eps)
      matches.emplace_back(static_cast<int>(i), j);
  }
  return matches;
}

}  // namespace lfd
