#include "bsgm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "bsgm/assignment.hpp"

namespace bsgm {
namespace {

void require_same_length(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "label vectors differ in length (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

std::vector<int> densify_labels(std::span<const int> z) {
  std::vector<int> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), z[i]) - sorted.begin());
  }
  return out;
}

ContingencyTable contingency(std::span<const int> z_true,
                             std::span<const int> z_est) {
  require_same_length(z_true, z_est);
  const auto a = densify_labels(z_true);
  const auto b = densify_labels(z_est);
  const int ka = a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1;
  const int kb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
  ContingencyTable t;
  t.counts = Eigen::MatrixXi::Zero(ka, kb);
  t.row_totals.assign(static_cast<std::size_t>(ka), 0);
  t.col_totals.assign(static_cast<std::size_t>(kb), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++t.counts(a[i], b[i]);
    ++t.row_totals[a[i]];
    ++t.col_totals[b[i]];
  }
  t.n = static_cast<int>(a.size());
  return t;
}

double ari(std::span<const int> z_true, std::span<const int> z_est) {
  require_same_length(z_true, z_est);
  if (z_true.size() < 2) {
    throw Error(ErrorKind::LengthMismatch, "ARI needs at least 2 labels");
  }
  const auto t = contingency(z_true, z_est);
  double index = 0.0;
  for (Eigen::Index r = 0; r < t.counts.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.counts.cols(); ++c) {
      index += choose2(t.counts(r, c));
    }
  }
  double rows = 0.0, cols = 0.0;
  for (int v : t.row_totals) rows += choose2(v);
  for (int v : t.col_totals) cols += choose2(v);
  const double expected = rows * cols / choose2(t.n);
  const double max_index = 0.5 * (rows + cols);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double nmi(std::span<const int> z_true, std::span<const int> z_est) {
  const auto t = contingency(z_true, z_est);
  if (t.row_totals.size() < 2 || t.col_totals.size() < 2) {
    throw Error(ErrorKind::DegeneratePartition,
                "NMI is undefined when a partition has one cluster");
  }
  const double n = t.n;
  double mi = 0.0;
  for (Eigen::Index r = 0; r < t.counts.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.counts.cols(); ++c) {
      const double nrc = t.counts(r, c);
      if (nrc == 0.0) continue;
      mi += nrc / n *
            std::log(nrc * n / (static_cast<double>(t.row_totals[r]) *
                                t.col_totals[c]));
    }
  }
  auto entropy = [n](const std::vector<int>& totals) {
    double h = 0.0;
    for (int v : totals) {
      if (v > 0) h -= v / n * std::log(v / n);
    }
    return h;
  };
  return mi / std::sqrt(entropy(t.row_totals) * entropy(t.col_totals));
}

double min_hamming(std::span<const int> z, std::span<const int> z_prime,
                   int k) {
  require_same_length(z, z_prime);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0 || z[i] >= k || z_prime[i] < 0 || z_prime[i] >= k) {
      throw Error(ErrorKind::LabelOutOfRange,
                  "label outside [0, " + std::to_string(k) + ")");
    }
  }
  if (z.empty()) return 0.0;
  // cost(a, b) = -#{i : z_i = a, z'_i = b}; tau maps b -> a.
  Matrix cost = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < z.size(); ++i) cost(z_prime[i], z[i]) -= 1.0;
  const auto tau = solve_assignment(cost);
  const double matched = -assignment_cost(cost, tau);
  return (static_cast<double>(z.size()) - matched) /
         static_cast<double>(z.size());
}

double min_hamming(std::span<const int> z, std::span<const int> z_prime) {
  const auto a = densify_labels(z);
  const auto b = densify_labels(z_prime);
  int k = 1;
  for (int v : a) k = std::max(k, v + 1);
  for (int v : b) k = std::max(k, v + 1);
  return min_hamming(a, b, k);
}

double mean_matrix_error(const Matrix& mu_hat, std::span<const int> z_hat,
                         const Matrix& mu_true, std::span<const int> z_true) {
  if (z_hat.size() != z_true.size() || mu_hat.rows() != mu_true.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "estimate and truth have inconsistent dimensions");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    if (z_hat[i] < 0 || z_hat[i] >= mu_hat.cols() || z_true[i] < 0 ||
        z_true[i] >= mu_true.cols()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "label does not index a mean column");
    }
    total += (mu_hat.col(z_hat[i]) - mu_true.col(z_true[i])).squaredNorm();
  }
  return total;
}

}  // namespace bsgm
