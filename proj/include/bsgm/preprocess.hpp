#pragma once

#include <string>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

struct PreprocessResult {
  DataMatrix data;
  std::vector<Eigen::Index> kept_genes;  // input row of each output row
  std::vector<std::string> warnings;
};

/// Count matrix (genes x cells) to standardized expression:
///   1. drop genes whose total count is <= min_total
///   2. x = log2(count + 1)
///   3. divide each cell by the column sum of its log values
///   4. centre each gene and scale to unit population variance; genes that
///      are constant at this point are dropped with a warning
/// Throws NonFiniteEntry on negative or non-finite counts, EmptyObservation
/// when a cell has no expression left after step 1, EmptyAfterFilter when
/// no gene survives.
PreprocessResult preprocess_scrna(const Matrix& counts, double min_total = 10.0);

}  // namespace bsgm
