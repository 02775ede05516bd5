#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsgm/core.hpp"

namespace bsgm {

struct CsvMatrix {
  Matrix values;
  std::vector<std::string> header;  // empty when the file had none
};

/// Comma-separated numbers, one matrix row per line. A first line holding
/// any non-numeric field is taken as a header. `transpose` flips the result
/// so that observation-per-row files load as p x n. Throws ParseError.
CsvMatrix read_csv(std::istream& in, bool transpose = false);
CsvMatrix read_csv(const std::filesystem::path& path, bool transpose = false);

/// Round-trip precision (17 significant digits).
void write_csv(std::ostream& out, const Matrix& m,
               const std::vector<std::string>& header = {});
void write_csv(const std::filesystem::path& path, const Matrix& m,
               const std::vector<std::string>& header = {});

/// Newline-delimited JSON: one metadata record, then one record per snapshot.
/// Doubles round-trip bit-exactly.
void write_trace(std::ostream& out, const ChainTrace& trace);
void write_trace(const std::filesystem::path& path, const ChainTrace& trace);
ChainTrace read_trace(std::istream& in);
ChainTrace read_trace(const std::filesystem::path& path);

/// {"k_hat", "z_hat" (1-based), "support" (1-based), "mu_hat" (p rows)}.
void write_estimate(const std::filesystem::path& path,
                    const ClusterEstimate& est);
ClusterEstimate read_estimate(const std::filesystem::path& path);

/// "observation,cluster" with 1-based values.
void write_assignments(const std::filesystem::path& path,
                       const std::vector<int>& z);

struct Truth {
  std::vector<int> z;  // 0-based in memory, 1-based on disk
  Matrix mu;           // p x K*
};

void write_truth(const std::filesystem::path& path, const Truth& truth);
Truth read_truth(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bsgm
