#include "bsgm/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace bsgm {

double assignment_cost(const Matrix& cost, const std::vector<int>& perm) {
  double total = 0.0;
  for (std::size_t r = 0; r < perm.size(); ++r) {
    total += cost(static_cast<Eigen::Index>(r), perm[r]);
  }
  return total;
}

std::vector<int> assignment_exhaustive(const Matrix& cost) {
  const auto k = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    const double c = assignment_cost(cost, perm);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> assignment_hungarian(const Matrix& cost) {
  // Shortest augmenting paths with row/column potentials, 1-based internally.
  const auto n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(r0 - 1, col - 1) - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> rows_to_cols(static_cast<std::size_t>(n));
  for (int col = 1; col <= n; ++col) rows_to_cols[match[col] - 1] = col - 1;
  return rows_to_cols;
}

std::vector<int> solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "assignment needs a square cost");
  }
  if (cost.rows() == 0) return {};
  if (cost.rows() <= kExhaustiveLimit) return assignment_exhaustive(cost);
  return assignment_hungarian(cost);
}

}  // namespace bsgm
