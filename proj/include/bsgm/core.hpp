#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bsgm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorKind {
  NonFiniteEntry,
  TooFewObservations,
  InvalidHyperparams,
  NonNormalizable,
  OutOfSupport,
  AllWeightsNegInfinite,
  InvalidK,
  MismatchedLengths,
  LengthMismatch,
  DegeneratePartition,
  LabelOutOfRange,
  DimensionMismatch,
  BadSpec,
  EmptyAfterFilter,
  EmptyObservation,
  ConfigError,
  ParseError,
};

const char* to_string(ErrorKind kind);

// Every library failure carries a kind so that callers (tests, CLI exit
// codes) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// p x n observation matrix; column i is observation Y_i.
struct DataMatrix {
  Matrix values;

  DataMatrix() = default;
  explicit DataMatrix(Matrix v) : values(std::move(v)) {}

  Eigen::Index p() const { return values.rows(); }
  Eigen::Index n() const { return values.cols(); }
};

struct ValidationReport {
  Eigen::Index p = 0;
  Eigen::Index n = 0;
  std::vector<Eigen::Index> constant_rows;

  bool operator==(const ValidationReport&) const = default;
};

/// Throws NonFiniteEntry / TooFewObservations; otherwise reports shape and
/// constant features.
ValidationReport validate_dataset(const DataMatrix& data);

enum class SslMode { JointSSL, ColumnSSL };

/// How the urn computes V_n(t).
enum class VnMode {
  Exact,        // truncated finite series
  Approximate,  // closed form used inside the reference pseudocode
};

struct Hyperparams {
  double lambda0 = 100.0;
  double lambda1 = 1.0;
  double kappa = 0.1;
  double beta_theta = 1.0;
  double alpha = 1.0;
  double poisson_lambda = 2.0;
  int k_max = 20;
  SslMode ssl_mode = SslMode::JointSSL;
  VnMode vn_mode = VnMode::Exact;

  bool operator==(const Hyperparams&) const = default;
};

/// Simulation defaults: kappa=0.1, lambda0=100, lambda1=1, Poisson rate 2,
/// K_max=20, alpha=1 and beta_theta = p^(1+kappa) ln p.
Hyperparams default_hyperparams(Eigen::Index p);

/// Rejects lambda0 <= lambda1, non-positive rates and k_max outside [1, n].
/// Returns a warning message (empty when none) for alpha < 1.
std::string check_hyperparams(const Hyperparams& hyper, Eigen::Index n);

/// Stable 64-bit digest of every hyperparameter field.
std::uint64_t hyperparams_hash(const Hyperparams& hyper);

struct Cluster {
  Vector mu;
  Vector phi;
  // Per-cluster inclusion indicators; only populated in ColumnSSL mode.
  Eigen::VectorXi xi;
  int size = 0;
};

/// One Gibbs state. Labels in `z` are 0-based and dense: z[i] indexes
/// `clusters`.
struct ModelState {
  std::vector<int> z;
  std::vector<Cluster> clusters;
  Eigen::VectorXi xi;  // shared indicators (JointSSL)
  double theta = 0.5;

  int k() const { return static_cast<int>(clusters.size()); }
};

/// Throws std::logic_error if any partition invariant is broken.
void check_state(const ModelState& state, const Hyperparams& hyper,
                 Eigen::Index p);

/// Recomputes cluster sizes from `z`, drops empty clusters and relabels so
/// that labels stay dense and keep their relative order.
void compact_labels(ModelState& state);

struct Snapshot {
  std::vector<int> z;
  int k = 0;
  double theta = 0.0;
  // Features with xi_j = 1 (any cluster in ColumnSSL), ascending.
  std::vector<int> support;
  // Rows follow `support` unless `dense` is set, then all p rows.
  Matrix mu;
  bool dense = false;
};

/// Bitwise equality, including matrix shapes.
bool operator==(const Snapshot& a, const Snapshot& b);

struct TraceMeta {
  int n_burn = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  int chain_id = 0;
  std::uint64_t hyper_hash = 0;
  Eigen::Index p = 0;
  Eigen::Index n = 0;

  bool operator==(const TraceMeta&) const = default;
};

struct ChainTrace {
  TraceMeta meta;
  std::vector<Snapshot> snapshots;

  bool operator==(const ChainTrace&) const = default;
};

/// Dense p x K cluster means of a snapshot (rows off the support are zero).
Matrix dense_mu(const Snapshot& snap, Eigen::Index p);

/// Labels in `z_hat` are 0-based here and exported 1-based.
struct ClusterEstimate {
  int k_hat = 0;
  std::vector<int> z_hat;
  Matrix mu_hat;
  std::vector<int> support_hat;
};

}  // namespace bsgm
