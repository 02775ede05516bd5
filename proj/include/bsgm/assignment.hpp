#pragma once

#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

/// Minimum-cost perfect matching on a square cost matrix. Entry r of the
/// result is the column assigned to row r.
///
/// Sizes up to kExhaustiveLimit are solved by enumerating permutations in
/// lexicographic order (first minimum wins); larger ones by the O(K^3)
/// Hungarian method with potentials.
std::vector<int> solve_assignment(const Matrix& cost);

inline constexpr int kExhaustiveLimit = 6;

std::vector<int> assignment_exhaustive(const Matrix& cost);
std::vector<int> assignment_hungarian(const Matrix& cost);

double assignment_cost(const Matrix& cost, const std::vector<int>& rows_to_cols);

}  // namespace bsgm
