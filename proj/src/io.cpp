#include "bsgm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace bsgm {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& msg) {
  throw Error(ErrorKind::ParseError, msg);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos
                                          : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& field, double& value) {
  if (field == "NaN" || field == "nan") {
    value = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && first != last;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix rows_matrix(const json& rows, Eigen::Index cols_if_empty = 0) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c =
      r == 0 ? cols_if_empty : static_cast<Eigen::Index>(rows[0].size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c) {
      parse_error("ragged matrix in JSON");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json parse_json(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error(what + ": " + e.what());
  }
}

}  // namespace

CsvMatrix read_csv(std::istream& in, bool transpose) {
  CsvMatrix out;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t f = 0; f < fields.size() && numeric; ++f) {
      numeric = parse_double(fields[f], row[f]);
    }
    if (!numeric) {
      if (rows.empty() && out.header.empty()) {
        out.header = fields;
        continue;
      }
      parse_error("non-numeric field on line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_error("line " + std::to_string(line_no) + " has " +
                  std::to_string(row.size()) + " fields, expected " +
                  std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_error("CSV has no data rows");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.front().size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  out.values = transpose ? Matrix(m.transpose()) : std::move(m);
  return out;
}

CsvMatrix read_csv(const std::filesystem::path& path, bool transpose) {
  auto in = open_in(path);
  return read_csv(in, transpose);
}

void write_csv(std::ostream& out, const Matrix& m,
               const std::vector<std::string>& header) {
  for (std::size_t h = 0; h < header.size(); ++h) {
    out << (h ? "," : "") << header[h];
  }
  if (!header.empty()) out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Matrix& m,
               const std::vector<std::string>& header) {
  auto out = open_out(path);
  write_csv(out, m, header);
}

void write_trace(std::ostream& out, const ChainTrace& trace) {
  const auto& m = trace.meta;
  out << json{{"record", "meta"},       {"n_burn", m.n_burn},
              {"thin", m.thin},         {"seed", m.seed},
              {"chain_id", m.chain_id}, {"hyper_hash", m.hyper_hash},
              {"p", m.p},               {"n", m.n}}
             .dump()
      << '\n';
  for (const auto& s : trace.snapshots) {
    out << json{{"z", s.z},
                {"k", s.k},
                {"theta", s.theta},
                {"support", s.support},
                {"dense", s.dense},
                {"mu", matrix_rows(s.mu)},
                {"mu_cols", s.mu.cols()}}
               .dump()
        << '\n';
  }
}

void write_trace(const std::filesystem::path& path, const ChainTrace& trace) {
  auto out = open_out(path);
  write_trace(out, trace);
}

ChainTrace read_trace(std::istream& in) {
  ChainTrace trace;
  std::string line;
  bool have_meta = false;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const json rec = json::parse(line);
      if (!have_meta) {
        if (rec.value("record", "") != "meta") {
          parse_error("trace must start with a meta record");
        }
        auto& m = trace.meta;
        m.n_burn = rec.at("n_burn").get<int>();
        m.thin = rec.at("thin").get<int>();
        m.seed = rec.at("seed").get<std::uint64_t>();
        m.chain_id = rec.at("chain_id").get<int>();
        m.hyper_hash = rec.at("hyper_hash").get<std::uint64_t>();
        m.p = rec.at("p").get<Eigen::Index>();
        m.n = rec.at("n").get<Eigen::Index>();
        have_meta = true;
        continue;
      }
      Snapshot s;
      s.z = rec.at("z").get<std::vector<int>>();
      s.k = rec.at("k").get<int>();
      s.theta = rec.at("theta").get<double>();
      s.support = rec.at("support").get<std::vector<int>>();
      s.dense = rec.at("dense").get<bool>();
      s.mu = rows_matrix(rec.at("mu"), rec.at("mu_cols").get<Eigen::Index>());
      trace.snapshots.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    parse_error("trace line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_meta) parse_error("empty trace");
  return trace;
}

ChainTrace read_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trace(in);
}

void write_estimate(const std::filesystem::path& path,
                    const ClusterEstimate& est) {
  std::vector<int> z(est.z_hat);
  for (auto& v : z) ++v;
  std::vector<int> support(est.support_hat);
  for (auto& v : support) ++v;
  auto out = open_out(path);
  out << json{{"k_hat", est.k_hat},
              {"z_hat", z},
              {"support", support},
              {"mu_hat", matrix_rows(est.mu_hat)}}
             .dump(1)
      << '\n';
}

ClusterEstimate read_estimate(const std::filesystem::path& path) {
  auto in = open_in(path);
  const json j = parse_json(in, path.string());
  ClusterEstimate est;
  try {
    est.k_hat = j.at("k_hat").get<int>();
    est.z_hat = j.at("z_hat").get<std::vector<int>>();
    est.support_hat = j.at("support").get<std::vector<int>>();
    est.mu_hat = rows_matrix(j.at("mu_hat"), est.k_hat);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
  for (auto& v : est.z_hat) --v;
  for (auto& v : est.support_hat) --v;
  return est;
}

void write_assignments(const std::filesystem::path& path,
                       const std::vector<int>& z) {
  auto out = open_out(path);
  out << "observation,cluster\n";
  for (std::size_t i = 0; i < z.size(); ++i) {
    out << i + 1 << ',' << z[i] + 1 << '\n';
  }
}

void write_truth(const std::filesystem::path& path, const Truth& truth) {
  std::vector<int> z(truth.z);
  for (auto& v : z) ++v;
  auto out = open_out(path);
  out << json{{"z_true", z}, {"mu_true", matrix_rows(truth.mu)}}.dump(1)
      << '\n';
}

Truth read_truth(const std::filesystem::path& path) {
  auto in = open_in(path);
  const json j = parse_json(in, path.string());
  Truth t;
  try {
    t.z = j.at("z_true").get<std::vector<int>>();
    t.mu = rows_matrix(j.at("mu_true"));
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
  for (auto& v : t.z) --v;
  return t;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace bsgm
