#include "bsgm/preprocess.hpp"

#include <cmath>

namespace bsgm {

PreprocessResult preprocess_scrna(const Matrix& counts, double min_total) {
  for (Eigen::Index i = 0; i < counts.cols(); ++i) {
    for (Eigen::Index j = 0; j < counts.rows(); ++j) {
      const double v = counts(j, i);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::NonFiniteEntry,
                    "count at row " + std::to_string(j) + ", column " +
                        std::to_string(i) + " is negative or non-finite");
      }
    }
  }

  PreprocessResult out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < counts.rows(); ++j) {
    if (counts.row(j).sum() > min_total) kept.push_back(j);
  }
  if (kept.empty()) {
    throw Error(ErrorKind::EmptyAfterFilter,
                "no gene has total count above " + std::to_string(min_total));
  }

  Matrix x(static_cast<Eigen::Index>(kept.size()), counts.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) =
        (counts.row(kept[r]).array() + 1.0).log2().matrix();
  }
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double total = x.col(i).sum();
    if (!(total > 0.0)) {
      throw Error(ErrorKind::EmptyObservation,
                  "cell " + std::to_string(i) +
                      " has no expression among retained genes");
    }
    x.col(i) /= total;
  }

  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto row = x.row(r).array();
    const double mean = row.mean();
    row -= mean;
    const double sd = std::sqrt(row.square().mean());
    if (!(sd > 0.0)) {
      out.warnings.push_back("gene " + std::to_string(kept[r]) +
                             " is constant after normalization; dropped");
      continue;
    }
    row /= sd;
    rows.push_back(r);
  }
  if (rows.empty()) {
    throw Error(ErrorKind::EmptyAfterFilter,
                "every retained gene is constant after normalization");
  }
  Matrix y(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    y.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    out.kept_genes.push_back(kept[rows[r]]);
  }
  out.data = DataMatrix(std::move(y));
  return out;
}

}  // namespace bsgm
