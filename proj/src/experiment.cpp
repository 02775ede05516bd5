#include "bsgm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bsgm/metrics.hpp"
#include "json.hpp"

namespace bsgm {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::ConfigError, msg);
}

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Method> kMethods[] = {
    {Method::Bayesian, "bayesian"}, {Method::Cmle, "cmle"},
    {Method::KMeans, "kmeans"}};
constexpr EnumName<ScenarioKind> kScenarios[] = {
    {ScenarioKind::One, "one"},
    {ScenarioKind::Two, "two"},
    {ScenarioKind::Three, "three"},
    {ScenarioKind::Custom, "custom"}};
constexpr EnumName<InitKind> kInits[] = {
    {InitKind::SingleCluster, "single"},
    {InitKind::RandomK, "random_k"},
    {InitKind::KMeansPlusPlus, "kmeans++"}};
constexpr EnumName<XiInit> kXiInits[] = {{XiInit::AllSlab, "slab"},
                                         {XiInit::AllSpike, "spike"}};
constexpr EnumName<SslMode> kSslModes[] = {{SslMode::JointSSL, "joint"},
                                           {SslMode::ColumnSSL, "column"}};
constexpr EnumName<VnMode> kVnModes[] = {{VnMode::Exact, "exact"},
                                         {VnMode::Approximate, "approximate"}};

template <typename E, std::size_t N>
E parse_enum(const json& j, const EnumName<E> (&table)[N], const char* what) {
  const auto s = j.get<std::string>();
  for (const auto& e : table) {
    if (s == e.name) return e.value;
  }
  std::string allowed;
  for (const auto& e : table) allowed += std::string(" ") + e.name;
  config_error(std::string("unknown ") + what + " '" + s + "' (allowed:" +
               allowed + ")");
}

template <typename E, std::size_t N>
const char* enum_name(E v, const EnumName<E> (&table)[N]) {
  for (const auto& e : table) {
    if (e.value == v) return e.name;
  }
  return "?";
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.contains(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

template <typename T>
void read_val(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_matrix(const json& rows) {
  if (!rows.is_array() || rows.empty()) return {};
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != m.cols()) {
      config_error("ragged matrix in config");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[r][c].get<double>();
    }
  }
  return m;
}

ScenarioSpec parse_scenario(const json& j) {
  check_keys(j,
             {"kind", "k_star", "s", "p", "n", "mean_scale", "seed", "means",
              "weights", "variances", "t_dof"},
             "scenario");
  ScenarioSpec s;
  if (j.contains("kind")) s.kind = parse_enum(j.at("kind"), kScenarios, "scenario");
  read_val(j, "k_star", s.k_star);
  read_val(j, "s", s.s);
  read_val(j, "p", s.p);
  read_val(j, "n", s.n);
  read_val(j, "mean_scale", s.mean_scale);
  read_val(j, "seed", s.seed);
  if (j.contains("means")) s.means = json_matrix(j.at("means"));
  read_val(j, "weights", s.weights);
  if (j.contains("variances")) s.variances = json_matrix(j.at("variances"));
  read_opt(j, "t_dof", s.t_dof);
  if (s.kind == ScenarioKind::Custom && j.contains("means") && !j.contains("p")) {
    s.p = s.means.rows();
  }
  return s;
}

json scenario_json(const ScenarioSpec& s) {
  json j{{"kind", enum_name(s.kind, kScenarios)},
         {"k_star", s.k_star},
         {"s", s.s},
         {"p", s.p},
         {"n", s.n},
         {"mean_scale", s.mean_scale},
         {"seed", s.seed}};
  if (s.kind == ScenarioKind::Custom) {
    j["means"] = matrix_json(s.means);
    j["weights"] = s.weights;
    if (s.variances.size() > 0) j["variances"] = matrix_json(s.variances);
  }
  if (s.t_dof) j["t_dof"] = *s.t_dof;
  return j;
}

json hyper_json(const Hyperparams& h) {
  return {{"lambda0", h.lambda0},
          {"lambda1", h.lambda1},
          {"kappa", h.kappa},
          {"beta_theta", h.beta_theta},
          {"alpha", h.alpha},
          {"poisson_lambda", h.poisson_lambda},
          {"k_max", h.k_max},
          {"ssl_mode", enum_name(h.ssl_mode, kSslModes)},
          {"vn_mode", enum_name(h.vn_mode, kVnModes)}};
}

int true_k(const Truth& t) {
  return t.z.empty() ? 0 : *std::max_element(t.z.begin(), t.z.end()) + 1;
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

}  // namespace

Hyperparams resolve_hyperparams(const HyperOverrides& o, Eigen::Index p,
                                Eigen::Index n) {
  Hyperparams h = default_hyperparams(p);
  if (o.kappa) {
    h.kappa = *o.kappa;
    const double pd = static_cast<double>(p);
    h.beta_theta = std::pow(pd, 1.0 + h.kappa) * std::log(pd);
  }
  if (o.lambda0) h.lambda0 = *o.lambda0;
  if (o.lambda1) h.lambda1 = *o.lambda1;
  if (o.beta_theta) h.beta_theta = *o.beta_theta;
  if (o.alpha) h.alpha = *o.alpha;
  if (o.poisson_lambda) h.poisson_lambda = *o.poisson_lambda;
  h.k_max = o.k_max ? *o.k_max
                    : static_cast<int>(std::min<Eigen::Index>(h.k_max, n));
  if (o.ssl_mode) h.ssl_mode = *o.ssl_mode;
  if (o.vn_mode) h.vn_mode = *o.vn_mode;
  return h;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    check_keys(j,
               {"dataset", "transpose", "truth", "scenario", "method",
                "hyperparams", "run", "cmle", "output", "write_traces"},
               "config");
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    read_val(j, "transpose", c.transpose);
    if (j.contains("truth")) c.truth = j.at("truth").get<std::string>();
    if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("method")) c.method = parse_enum(j.at("method"), kMethods, "method");
    if (j.contains("output")) c.output_dir = j.at("output").get<std::string>();
    read_val(j, "write_traces", c.write_traces);

    if (j.contains("hyperparams")) {
      const json& h = j.at("hyperparams");
      check_keys(h,
                 {"lambda0", "lambda1", "kappa", "beta_theta", "alpha",
                  "poisson_lambda", "k_max", "ssl_mode", "vn_mode"},
                 "hyperparams");
      auto& o = c.hyper;
      read_opt(h, "lambda0", o.lambda0);
      read_opt(h, "lambda1", o.lambda1);
      read_opt(h, "kappa", o.kappa);
      read_opt(h, "beta_theta", o.beta_theta);
      read_opt(h, "alpha", o.alpha);
      read_opt(h, "poisson_lambda", o.poisson_lambda);
      read_opt(h, "k_max", o.k_max);
      if (h.contains("ssl_mode")) o.ssl_mode = parse_enum(h.at("ssl_mode"), kSslModes, "ssl_mode");
      if (h.contains("vn_mode")) o.vn_mode = parse_enum(h.at("vn_mode"), kVnModes, "vn_mode");
    }
    if (j.contains("run")) {
      const json& r = j.at("run");
      check_keys(r,
                 {"n_burn", "n_keep", "n_chains", "thin", "seed", "init",
                  "init_k", "xi_init", "dense_snapshots", "n_workers"},
                 "run");
      read_val(r, "n_burn", c.run.n_burn);
      read_val(r, "n_keep", c.run.n_keep);
      read_val(r, "n_chains", c.run.n_chains);
      read_val(r, "thin", c.run.thin);
      read_val(r, "seed", c.run.seed);
      if (r.contains("init")) c.run.init.kind = parse_enum(r.at("init"), kInits, "init");
      read_val(r, "init_k", c.run.init.k);
      if (r.contains("xi_init")) c.run.xi_init = parse_enum(r.at("xi_init"), kXiInits, "xi_init");
      read_val(r, "dense_snapshots", c.run.dense_snapshots);
      read_val(r, "n_workers", c.run.n_workers);
    }
    if (j.contains("cmle")) {
      const json& m = j.at("cmle");
      check_keys(m, {"k", "s", "max_iters", "n_restarts", "seed"}, "cmle");
      read_val(m, "k", c.cmle.k);
      read_val(m, "s", c.cmle.s);
      read_val(m, "max_iters", c.cmle.max_iters);
      read_val(m, "n_restarts", c.cmle.n_restarts);
      read_val(m, "seed", c.cmle.seed);
    }
  } catch (const json::exception& e) {
    config_error(std::string("config: ") + e.what());
  }
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  if (c.dataset) j["dataset"] = c.dataset->string();
  j["transpose"] = c.transpose;
  if (c.truth) j["truth"] = c.truth->string();
  if (c.scenario) j["scenario"] = scenario_json(*c.scenario);
  j["method"] = enum_name(c.method, kMethods);
  json h = json::object();
  const auto& o = c.hyper;
  if (o.lambda0) h["lambda0"] = *o.lambda0;
  if (o.lambda1) h["lambda1"] = *o.lambda1;
  if (o.kappa) h["kappa"] = *o.kappa;
  if (o.beta_theta) h["beta_theta"] = *o.beta_theta;
  if (o.alpha) h["alpha"] = *o.alpha;
  if (o.poisson_lambda) h["poisson_lambda"] = *o.poisson_lambda;
  if (o.k_max) h["k_max"] = *o.k_max;
  if (o.ssl_mode) h["ssl_mode"] = enum_name(*o.ssl_mode, kSslModes);
  if (o.vn_mode) h["vn_mode"] = enum_name(*o.vn_mode, kVnModes);
  j["hyperparams"] = h;
  j["run"] = {{"n_burn", c.run.n_burn},
              {"n_keep", c.run.n_keep},
              {"n_chains", c.run.n_chains},
              {"thin", c.run.thin},
              {"seed", c.run.seed},
              {"init", enum_name(c.run.init.kind, kInits)},
              {"init_k", c.run.init.k},
              {"xi_init", enum_name(c.run.xi_init, kXiInits)},
              {"dense_snapshots", c.run.dense_snapshots}};
  j["cmle"] = {{"k", c.cmle.k},
               {"s", c.cmle.s},
               {"max_iters", c.cmle.max_iters},
               {"n_restarts", c.cmle.n_restarts},
               {"seed", c.cmle.seed}};
  j["output"] = c.output_dir.string();
  j["write_traces"] = c.write_traces;
  return j.dump(1);
}

void check_config(const ExperimentConfig& c) {
  if (c.dataset.has_value() == c.scenario.has_value()) {
    config_error("exactly one of 'dataset' and 'scenario' must be given");
  }
  if (c.dataset && !std::filesystem::exists(*c.dataset)) {
    config_error("dataset not found: " + c.dataset->string());
  }
  if (c.truth && !c.dataset) {
    config_error("'truth' only applies to a dataset source");
  }
  if (c.truth && !std::filesystem::exists(*c.truth)) {
    config_error("truth file not found: " + c.truth->string());
  }
  if (c.run.n_keep < 1 || c.run.n_burn < 0 || c.run.n_chains < 1 ||
      c.run.thin < 1) {
    config_error("run needs n_keep >= 1, n_burn >= 0, n_chains >= 1, thin >= 1");
  }
}

LoadedData load_data(const ExperimentConfig& c) {
  check_config(c);
  LoadedData out;
  if (c.scenario) {
    auto syn = generate(*c.scenario);
    out.data = std::move(syn.data);
    out.truth = Truth{std::move(syn.z_true), std::move(syn.mu_true)};
  } else {
    out.data = DataMatrix(read_csv(*c.dataset, c.transpose).values);
    if (c.truth) out.truth = read_truth(*c.truth);
  }
  validate_dataset(out.data);
  if (out.truth && static_cast<Eigen::Index>(out.truth->z.size()) != out.data.n()) {
    throw Error(ErrorKind::DimensionMismatch,
                "truth labels do not match the number of observations");
  }
  return out;
}

Evaluation evaluate(const ClusterEstimate& est, const Truth& truth) {
  Evaluation e;
  e.k_hat = est.k_hat;
  e.k_true = true_k(truth);
  e.ari = ari(truth.z, est.z_hat);
  try {
    e.nmi = nmi(truth.z, est.z_hat);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::DegeneratePartition) throw;
  }
  e.d_hamming = min_hamming(truth.z, est.z_hat);
  e.mean_matrix_error =
      mean_matrix_error(est.mu_hat, est.z_hat, truth.mu, truth.z);
  return e;
}

std::string to_json(const Evaluation& e) {
  json j{{"ari", e.ari},
         {"nmi", e.nmi ? json(*e.nmi) : json(nullptr)},
         {"d_hamming", e.d_hamming},
         {"mean_matrix_error", e.mean_matrix_error},
         {"k_hat", e.k_hat},
         {"k_true", e.k_true}};
  return dump(j);
}

std::string to_json(const std::vector<PsrfEntry>& table) {
  json arr = json::array();
  for (const auto& e : table) {
    arr.push_back({{"name", e.name},
                   {"psrf", std::isfinite(e.value) ? json(e.value)
                                                   : json("inf")}});
  }
  return dump(arr);
}

ReportBundle run_experiment(const ExperimentConfig& c) {
  const LoadedData loaded = load_data(c);
  const DataMatrix& data = loaded.data;
  ReportBundle out;
  out.hyper = resolve_hyperparams(c.hyper, data.p(), data.n());
  const auto report = validate_dataset(data);
  if (!report.constant_rows.empty()) {
    out.warnings.push_back(std::to_string(report.constant_rows.size()) +
                           " constant feature rows");
  }

  std::vector<ChainTrace> chains;
  switch (c.method) {
    case Method::Bayesian: {
      if (auto w = check_hyperparams(out.hyper, data.n()); !w.empty()) {
        out.warnings.push_back(w);
      }
      chains = run_chains(data, out.hyper, c.run);
      ChainTrace pooled;
      pooled.meta = chains.front().meta;
      for (const auto& ch : chains) {
        pooled.snapshots.insert(pooled.snapshots.end(), ch.snapshots.begin(),
                                ch.snapshots.end());
      }
      out.posterior = point_estimates(align_labels(pooled, data), data.p());
      out.estimate = out.posterior->estimate;
      if (chains.size() >= 2) out.psrf = psrf_table(chains, data);
      break;
    }
    case Method::Cmle:
    case Method::KMeans: {
      CmleConfig cfg = c.cmle;
      if (cfg.k == 0 && loaded.truth) cfg.k = true_k(*loaded.truth);
      if (cfg.k == 0) config_error("cmle/kmeans need 'cmle.k' without a truth");
      if (c.method == Method::KMeans) {
        cfg.s = static_cast<int>(data.p());
      } else if (cfg.s == 0) {
        if (!loaded.truth) config_error("cmle needs 'cmle.s' without a truth");
        cfg.s = static_cast<int>(
            (loaded.truth->mu.rowwise().squaredNorm().array() > 0.0).count());
      }
      const CmleResult fit = fit_cmle(data, cfg);
      std::vector<int> z = densify_labels(fit.z_hat);
      const int k_used = z.empty() ? 0 : *std::max_element(z.begin(), z.end()) + 1;
      // Column order follows first appearance in z, as densify_labels does.
      Matrix mu(data.p(), k_used);
      std::vector<bool> placed(static_cast<std::size_t>(k_used), false);
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (!placed[z[i]]) {
          mu.col(z[i]) = fit.mu_hat.col(fit.z_hat[i]);
          placed[z[i]] = true;
        }
      }
      out.estimate.k_hat = k_used;
      out.estimate.z_hat = std::move(z);
      out.estimate.mu_hat = std::move(mu);
      for (Eigen::Index j = 0; j < data.p(); ++j) {
        if (out.estimate.mu_hat.row(j).squaredNorm() > 0.0) {
          out.estimate.support_hat.push_back(static_cast<int>(j));
        }
      }
      break;
    }
  }
  if (loaded.truth) out.evaluation = evaluate(out.estimate, *loaded.truth);

  if (c.output_dir.empty()) return out;
  const auto& dir = c.output_dir;
  auto add = [&](const std::filesystem::path& rel) { out.files.push_back(rel); };

  write_estimate(dir / "estimate.json", out.estimate);
  add("estimate.json");
  write_assignments(dir / "assignments.csv", out.estimate.z_hat);
  add("assignments.csv");
  if (out.posterior) {
    json post{{"k_mode", out.posterior->k_mode}};
    json counts = json::array();
    for (auto [k, n] : out.posterior->k_counts) counts.push_back({k, n});
    post["k_counts"] = counts;
    post["inclusion"] = std::vector<double>(
        out.posterior->inclusion.data(),
        out.posterior->inclusion.data() + out.posterior->inclusion.size());
    write_text(dir / "posterior.json", dump(post));
    add("posterior.json");
  }
  if (out.evaluation) {
    write_text(dir / "metrics.json", to_json(*out.evaluation));
    add("metrics.json");
  }
  if (c.method == Method::Bayesian) {
    write_text(dir / "psrf.json", to_json(out.psrf));
    add("psrf.json");
    if (c.write_traces) {
      for (const auto& ch : chains) {
        const auto rel = std::filesystem::path("traces") /
                         ("chain_" + std::to_string(ch.meta.chain_id) + ".ndjson");
        write_trace(dir / rel, ch);
        add(rel);
      }
    }
  }

  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.generic_string());
  json manifest{{"tool", "bsgm"},
                {"version", kVersion},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"compiler", __VERSION__},
                {"config", json::parse(to_json(c))},
                {"hyperparams", hyper_json(out.hyper)},
                {"data", {{"p", data.p()}, {"n", data.n()}}},
                {"warnings", out.warnings},
                {"files", files}};
  write_text(dir / "manifest.json", dump(manifest));
  out.files.emplace_back("manifest.json");
  return out;
}

std::string render_report(const std::filesystem::path& dir) {
  auto load = [&](const char* name) -> std::optional<json> {
    std::ifstream in(dir / name);
    if (!in) return std::nullopt;
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, std::string(name) + ": " + e.what());
    }
  };
  const auto manifest = load("manifest.json");
  if (!manifest) {
    throw Error(ErrorKind::ConfigError,
                "no manifest.json in " + dir.string());
  }
  std::ostringstream os;
  const json& cfg = manifest->at("config");
  os << "run: " << dir.string() << "\n";
  os << "method: " << cfg.value("method", "?") << "\n";
  os << "data: p = " << manifest->at("data").at("p")
     << ", n = " << manifest->at("data").at("n") << "\n";
  if (const auto est = load("estimate.json")) {
    os << "K_hat: " << est->at("k_hat") << "\n";
    std::vector<int> sizes(est->at("k_hat").get<std::size_t>(), 0);
    for (int label : est->at("z_hat").get<std::vector<int>>()) {
      if (label >= 1 && label <= static_cast<int>(sizes.size())) {
        ++sizes[label - 1];
      }
    }
    os << "cluster sizes:";
    for (int s : sizes) os << ' ' << s;
    os << "\nselected features: " << est->at("support").size() << "\n";
  }
  if (const auto post = load("posterior.json")) {
    os << "posterior K counts:";
    for (const auto& kc : post->at("k_counts")) {
      os << ' ' << kc[0] << ':' << kc[1];
    }
    os << "\n";
  }
  if (const auto m = load("metrics.json")) {
    os << "ARI: " << m->at("ari") << "\nNMI: " << m->at("nmi")
       << "\nd_H: " << m->at("d_hamming")
       << "\nmean matrix error: " << m->at("mean_matrix_error")
       << "\nK_true: " << m->at("k_true") << "\n";
  }
  if (const auto ps = load("psrf.json"); ps && !ps->empty()) {
    os << "PSRF:";
    for (const auto& e : *ps) os << ' ' << e.at("name").get<std::string>() << '=' << e.at("psrf");
    os << "\n";
  }
  for (const auto& w : manifest->at("warnings")) {
    os << "warning: " << w.get<std::string>() << "\n";
  }
  return os.str();
}

}  // namespace bsgm
