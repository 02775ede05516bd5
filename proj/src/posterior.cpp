#include "bsgm/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "bsgm/assignment.hpp"

namespace bsgm {
namespace {

// Row indices of the full feature space that a snapshot stores.
std::vector<Eigen::Index> stored_rows(const Snapshot& snap, Eigen::Index p) {
  std::vector<Eigen::Index> rows;
  if (snap.dense) {
    rows.resize(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) rows[j] = j;
  } else {
    rows.assign(snap.support.begin(), snap.support.end());
  }
  return rows;
}

// ||Y - mu L^T||^2 minus the constant ||Y||^2.
double reconstruction_excess(const Snapshot& snap, const DataMatrix& data) {
  const auto rows = stored_rows(snap, data.p());
  const Eigen::Index width = snap.mu.cols();
  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), width);
  std::vector<int> sizes(static_cast<std::size_t>(width), 0);
  for (std::size_t i = 0; i < snap.z.size(); ++i) {
    const int c = snap.z[i];
    ++sizes[c];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sums(static_cast<Eigen::Index>(r), c) +=
          data.values(rows[r], static_cast<Eigen::Index>(i));
    }
  }
  double acc = 0.0;
  for (Eigen::Index c = 0; c < width; ++c) {
    if (sizes[c] == 0) continue;
    acc += sizes[c] * snap.mu.col(c).squaredNorm() -
           2.0 * sums.col(c).dot(snap.mu.col(c));
  }
  return acc;
}

double feature_value(const Snapshot& snap, Eigen::Index feature, int label) {
  if (snap.dense) return snap.mu(feature, label);
  const auto it = std::lower_bound(snap.support.begin(), snap.support.end(),
                                   static_cast<int>(feature));
  if (it == snap.support.end() || *it != feature) return 0.0;
  return snap.mu(it - snap.support.begin(), label);
}

std::vector<char> labels_present(const Snapshot& snap) {
  std::vector<char> present(static_cast<std::size_t>(snap.mu.cols()), 0);
  for (int label : snap.z) present[label] = 1;
  return present;
}

}  // namespace

double reconstruction_error(const Snapshot& snap, const DataMatrix& data) {
  return data.values.squaredNorm() + reconstruction_excess(snap, data);
}

std::size_t best_snapshot(const std::vector<Snapshot>& snaps,
                          const DataMatrix& data) {
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < snaps.size(); ++b) {
    const double err = reconstruction_excess(snaps[b], data);
    if (err < best_err) {
      best_err = err;
      best = b;
    }
  }
  return best;
}

std::vector<int> alignment_permutation(const Snapshot& snap,
                                       const Matrix& ref_mu, Eigen::Index p) {
  const auto rows = stored_rows(snap, p);
  const auto kb = static_cast<int>(snap.mu.cols());
  const auto kr = static_cast<int>(ref_mu.cols());
  const int m = std::max(kb, kr);

  Matrix cost = Matrix::Zero(m, m);
  double max_real = 0.0;
  for (int l = 0; l < kb; ++l) {
    const double own = snap.mu.col(l).squaredNorm();
    for (int k = 0; k < kr; ++k) {
      double cross = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        cross += ref_mu(rows[r], k) * snap.mu(static_cast<Eigen::Index>(r), l);
      }
      const double c = std::max(0.0, ref_mu.col(k).squaredNorm() + own - 2.0 * cross);
      cost(l, k) = c;
      max_real = std::max(max_real, c);
    }
  }
  // Padding entries share one value so they never influence the real match.
  const double pad = 2.0 * max_real + 1.0;
  for (int l = 0; l < m; ++l) {
    for (int k = 0; k < m; ++k) {
      if (l >= kb || k >= kr) cost(l, k) = pad;
    }
  }

  const auto match = solve_assignment(cost);
  std::vector<int> perm(static_cast<std::size_t>(kb));
  int next_surplus = kr;
  for (int l = 0; l < kb; ++l) {
    perm[l] = match[l] < kr ? match[l] : next_surplus++;
  }
  return perm;
}

Snapshot apply_permutation(const Snapshot& snap, const std::vector<int>& perm) {
  Snapshot out = snap;
  for (int& label : out.z) label = perm[label];
  const int width =
      perm.empty() ? 0 : *std::max_element(perm.begin(), perm.end()) + 1;
  out.mu = Matrix::Zero(snap.mu.rows(), width);
  for (std::size_t l = 0; l < perm.size(); ++l) {
    out.mu.col(perm[l]) = snap.mu.col(static_cast<Eigen::Index>(l));
  }
  return out;
}

AlignedTrace align_to(const ChainTrace& trace, const Snapshot& reference,
                      Eigen::Index p) {
  const Matrix ref = dense_mu(reference, p);
  AlignedTrace out;
  out.meta = trace.meta;
  out.snapshots.reserve(trace.snapshots.size());
  out.permutations.reserve(trace.snapshots.size());
  for (const Snapshot& snap : trace.snapshots) {
    auto perm = alignment_permutation(snap, ref, p);
    out.snapshots.push_back(apply_permutation(snap, perm));
    out.permutations.push_back(std::move(perm));
  }
  return out;
}

AlignedTrace align_labels(const ChainTrace& trace, const DataMatrix& data) {
  if (trace.snapshots.empty()) {
    throw Error(ErrorKind::ConfigError, "cannot align an empty trace");
  }
  const std::size_t ref = best_snapshot(trace.snapshots, data);
  AlignedTrace out = align_to(trace, trace.snapshots[ref], data.p());
  out.reference = ref;
  return out;
}

PosteriorEstimate point_estimates(const AlignedTrace& aligned, Eigen::Index p,
                                  double support_threshold) {
  const auto& snaps = aligned.snapshots;
  if (snaps.empty()) {
    throw Error(ErrorKind::ConfigError, "no snapshots to summarize");
  }
  PosteriorEstimate out;
  std::map<int, int> k_counts;
  for (const Snapshot& s : snaps) ++k_counts[s.k];
  out.k_counts.assign(k_counts.begin(), k_counts.end());
  int best_count = -1;
  for (const auto& [k, count] : k_counts) {
    if (count > best_count) {
      best_count = count;
      out.k_mode = k;
    }
  }

  std::vector<const Snapshot*> chosen;
  Eigen::Index width = 0;
  for (const Snapshot& s : snaps) {
    if (s.k != out.k_mode) continue;
    chosen.push_back(&s);
    width = std::max(width, s.mu.cols());
  }

  const std::size_t n = snaps.front().z.size();
  Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), width);
  for (const Snapshot* s : chosen) {
    for (std::size_t i = 0; i < n; ++i) ++votes(static_cast<Eigen::Index>(i), s->z[i]);
  }
  std::vector<int> raw(n);
  std::vector<char> used(static_cast<std::size_t>(width), 0);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    votes.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);  // first maximum
    raw[i] = static_cast<int>(arg);
    used[arg] = 1;
  }
  std::vector<int> remap(static_cast<std::size_t>(width), -1);
  int k_hat = 0;
  for (Eigen::Index c = 0; c < width; ++c) {
    if (used[c]) remap[c] = k_hat++;
  }

  ClusterEstimate& est = out.estimate;
  est.k_hat = k_hat;
  est.z_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) est.z_hat[i] = remap[raw[i]];

  est.mu_hat = Matrix::Zero(p, k_hat);
  std::vector<int> contributions(static_cast<std::size_t>(k_hat), 0);
  for (const Snapshot* s : chosen) {
    const auto present = labels_present(*s);
    const Matrix dense = dense_mu(*s, p);
    for (Eigen::Index c = 0; c < s->mu.cols(); ++c) {
      if (!present[c] || c >= width || remap[c] < 0) continue;
      est.mu_hat.col(remap[c]) += dense.col(c);
      ++contributions[remap[c]];
    }
  }
  for (int c = 0; c < k_hat; ++c) {
    if (contributions[c] > 0) est.mu_hat.col(c) /= contributions[c];
  }

  out.inclusion = Vector::Zero(p);
  for (const Snapshot& s : snaps) {
    for (int j : s.support) out.inclusion[j] += 1.0;
  }
  out.inclusion /= static_cast<double>(snaps.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    if (out.inclusion[j] >= support_threshold) {
      est.support_hat.push_back(static_cast<int>(j));
    }
  }
  return out;
}

double psrf(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) {
    throw Error(ErrorKind::MismatchedLengths, "PSRF needs at least 2 chains");
  }
  const std::size_t len = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != len) {
      throw Error(ErrorKind::MismatchedLengths, "PSRF chains differ in length");
    }
  }
  if (len < 2) {
    throw Error(ErrorKind::MismatchedLengths, "PSRF chains need length >= 2");
  }
  const double l = static_cast<double>(len);
  const double m = static_cast<double>(chains.size());
  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : chains) {
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= l;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    within += ss / (l - 1.0);
    means.push_back(mean);
  }
  within /= m;
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= m;
  double between = 0.0;
  for (double v : means) between += (v - grand) * (v - grand);
  between *= l / (m - 1.0);

  if (within == 0.0) {
    return between == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return std::sqrt(((l - 1.0) / l * within + between / l) / within);
}

std::vector<PsrfEntry> psrf_table(const std::vector<ChainTrace>& chains,
                                  const DataMatrix& data) {
  if (chains.size() < 2) {
    throw Error(ErrorKind::MismatchedLengths, "PSRF needs at least 2 chains");
  }
  // Pooled reference: best snapshot over every chain.
  const Snapshot* reference = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& chain : chains) {
    for (const auto& snap : chain.snapshots) {
      const double err = reconstruction_excess(snap, data);
      if (err < best) {
        best = err;
        reference = &snap;
      }
    }
  }
  if (reference == nullptr) {
    throw Error(ErrorKind::MismatchedLengths, "PSRF chains are empty");
  }
  std::vector<AlignedTrace> aligned;
  for (const auto& chain : chains) {
    aligned.push_back(align_to(chain, *reference, data.p()));
  }

  auto collect = [&](auto&& value) {
    std::vector<std::vector<double>> series;
    for (const auto& a : aligned) {
      std::vector<double> s;
      s.reserve(a.snapshots.size());
      for (const auto& snap : a.snapshots) s.push_back(value(snap));
      series.push_back(std::move(s));
    }
    return series;
  };

  std::vector<PsrfEntry> table;
  table.push_back({"theta", psrf(collect([](const Snapshot& s) { return s.theta; }))});
  table.push_back({"K", psrf(collect([](const Snapshot& s) {
                     return static_cast<double>(s.k);
                   }))});
  for (int label = 0; label < reference->k; ++label) {
    bool everywhere = true;
    for (const auto& a : aligned) {
      for (const auto& snap : a.snapshots) {
        if (snap.mu.cols() <= label || !labels_present(snap)[label]) {
          everywhere = false;
        }
      }
    }
    if (!everywhere) continue;
    table.push_back({"mu[" + std::to_string(label + 1) + "][1]",
                     psrf(collect([label](const Snapshot& s) {
                       return feature_value(s, 0, label);
                     }))});
  }
  return table;
}

}  // namespace bsgm
