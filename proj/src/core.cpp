#include "bsgm/core.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace bsgm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::InvalidHyperparams: return "InvalidHyperparams";
    case ErrorKind::NonNormalizable: return "NonNormalizable";
    case ErrorKind::OutOfSupport: return "OutOfSupport";
    case ErrorKind::AllWeightsNegInfinite: return "AllWeightsNegInfinite";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::MismatchedLengths: return "MismatchedLengths";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegeneratePartition: return "DegeneratePartition";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorKind::EmptyObservation: return "EmptyObservation";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

ValidationReport validate_dataset(const DataMatrix& data) {
  const auto& y = data.values;
  if (y.rows() < 1) {
    throw Error(ErrorKind::TooFewObservations, "dataset has no features");
  }
  if (y.cols() < 2) {
    throw Error(ErrorKind::TooFewObservations,
                "dataset needs at least 2 observations, got " +
                    std::to_string(y.cols()));
  }
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      if (!std::isfinite(y(j, i))) {
        std::ostringstream msg;
        msg << "non-finite entry at row " << j << ", column " << i;
        throw Error(ErrorKind::NonFiniteEntry, msg.str());
      }
    }
  }
  ValidationReport report;
  report.p = y.rows();
  report.n = y.cols();
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    if ((y.row(j).array() == y(j, 0)).all()) report.constant_rows.push_back(j);
  }
  return report;
}

Hyperparams default_hyperparams(Eigen::Index p) {
  if (p < 2) {
    throw Error(ErrorKind::InvalidHyperparams,
                "default hyperparameters need p >= 2");
  }
  Hyperparams h;
  h.kappa = 0.1;
  h.lambda0 = 100.0;
  h.lambda1 = 1.0;
  h.poisson_lambda = 2.0;
  h.k_max = 20;
  h.alpha = 1.0;
  const double pd = static_cast<double>(p);
  h.beta_theta = std::pow(pd, 1.0 + h.kappa) * std::log(pd);
  h.ssl_mode = SslMode::JointSSL;
  return h;
}

std::string check_hyperparams(const Hyperparams& h, Eigen::Index n) {
  auto fail = [](const std::string& m) {
    throw Error(ErrorKind::InvalidHyperparams, m);
  };
  if (!(h.lambda1 > 0.0)) fail("lambda1 must be positive");
  if (!(h.lambda0 > h.lambda1)) fail("lambda0 must exceed lambda1");
  if (!(h.beta_theta > 0.0)) fail("beta_theta must be positive");
  if (!(h.alpha > 0.0)) fail("alpha must be positive");
  if (!(h.poisson_lambda > 0.0)) fail("poisson_lambda must be positive");
  if (h.k_max < 1 || h.k_max > n) fail("k_max must lie in [1, n]");
  if (h.alpha < 1.0) {
    return "alpha < 1 is outside the range covered by the contraction theory";
  }
  return {};
}

std::uint64_t hyperparams_hash(const Hyperparams& h) {
  // FNV-1a over the raw field bytes.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash ^= bytes[i];
      hash *= 0x100000001b3ULL;
    }
  };
  for (double v : {h.lambda0, h.lambda1, h.kappa, h.beta_theta, h.alpha,
                   h.poisson_lambda}) {
    feed(&v, sizeof v);
  }
  const std::int64_t ints[] = {h.k_max, static_cast<int>(h.ssl_mode),
                               static_cast<int>(h.vn_mode)};
  feed(ints, sizeof ints);
  return hash;
}

void check_state(const ModelState& s, const Hyperparams& hyper,
                 Eigen::Index p) {
  auto fail = [](const std::string& m) { throw std::logic_error(m); };
  const int k = s.k();
  if (k < 1 || k > hyper.k_max) fail("active cluster count out of range");
  std::vector<int> counts(k, 0);
  for (int label : s.z) {
    if (label < 0 || label >= k) fail("label out of range");
    ++counts[label];
  }
  for (int c = 0; c < k; ++c) {
    const auto& cl = s.clusters[c];
    if (counts[c] == 0) fail("empty cluster");
    if (counts[c] != cl.size) fail("cluster size bookkeeping mismatch");
    if (cl.mu.size() != p || cl.phi.size() != p) fail("cluster dimension");
    if (!(cl.phi.array() > 0.0).all()) fail("non-positive phi");
    if (hyper.ssl_mode == SslMode::ColumnSSL && cl.xi.size() != p) {
      fail("missing per-cluster indicators");
    }
  }
  if (hyper.ssl_mode == SslMode::JointSSL && s.xi.size() != p) {
    fail("missing shared indicators");
  }
  if (!(s.theta > 0.0 && s.theta < 1.0)) fail("theta outside (0, 1)");
}

void compact_labels(ModelState& s) {
  std::vector<int> counts(s.clusters.size(), 0);
  for (int label : s.z) ++counts[label];
  std::vector<int> remap(s.clusters.size(), -1);
  std::vector<Cluster> kept;
  kept.reserve(s.clusters.size());
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    if (counts[c] == 0) continue;
    remap[c] = static_cast<int>(kept.size());
    kept.push_back(std::move(s.clusters[c]));
    kept.back().size = counts[c];
  }
  for (int& label : s.z) label = remap[label];
  s.clusters = std::move(kept);
}

bool operator==(const Snapshot& a, const Snapshot& b) {
  if (a.z != b.z || a.k != b.k || a.support != b.support ||
      a.dense != b.dense) {
    return false;
  }
  if (std::memcmp(&a.theta, &b.theta, sizeof(double)) != 0) return false;
  if (a.mu.rows() != b.mu.rows() || a.mu.cols() != b.mu.cols()) return false;
  return a.mu.size() == 0 ||
         std::memcmp(a.mu.data(), b.mu.data(),
                     sizeof(double) * static_cast<std::size_t>(a.mu.size())) ==
             0;
}

Matrix dense_mu(const Snapshot& snap, Eigen::Index p) {
  if (snap.dense) return snap.mu;
  Matrix out = Matrix::Zero(p, snap.mu.cols());
  for (std::size_t r = 0; r < snap.support.size(); ++r) {
    out.row(snap.support[r]) = snap.mu.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

}  // namespace bsgm
