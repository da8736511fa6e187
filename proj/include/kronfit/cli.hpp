#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kronfit/csv.hpp"
#include "kronfit/infer.hpp"
#include "kronfit/mc.hpp"
#include "kronfit/mdest.hpp"
#include "kronfit/qmle.hpp"
#include "kronfit/shrink.hpp"

namespace kronfit {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

enum class Subcommand { Estimate, Test, Simulate };
enum class ShrinkMode { None, Renormalize, Shrink2x2 };
enum class EstimatorSet { Md, MdOnestep };

struct RunConfig {
  Subcommand subcommand = Subcommand::Estimate;
  std::string input;
  std::vector<int> dims;
  std::string weight = "identity";  // identity | optimal | file:PATH
  DRegime regime = DRegime::Estimated;
  EstimatorSet estimators = EstimatorSet::MdOnestep;
  ShrinkMode shrink = ShrinkMode::None;
  std::string out;  // empty = stdout
  std::uint64_t seed = 0;
  int reps = 1000;
  int workers = 1;
  // simulate-only knobs
  long t_obs = 1000;
  std::vector<long> t_grid;  // overrides t_obs when non-empty
  ThetaVector theta0;        // empty = zero vector
  Vec d0;                    // empty = ones; doubles as known-D in known-d regime
  std::string innovation = "gaussian";  // gaussian | student-t:DF
};

namespace detail {

inline std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> dims;
  std::string token;
  std::stringstream ss(s);
  while (std::getline(ss, token, 'x')) {
    if (token.empty()) continue;
    dims.push_back(std::stoi(token));
  }
  if (dims.empty()) throw std::invalid_argument("could not parse --dims value '" + s + "'");
  return dims;
}

inline Innovation parse_innovation(const std::string& s) {
  if (s == "gaussian") return Innovation::gaussian();
  const std::string prefix = "student-t:";
  if (s.rfind(prefix, 0) == 0) return Innovation::student_t(std::stoi(s.substr(prefix.size())));
  throw std::invalid_argument("unknown innovation '" + s + "'");
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int jj = 0; jj < cols; ++jj) m(i, jj) = j[static_cast<size_t>(i)][static_cast<size_t>(jj)].get<double>();
  return m;
}

inline std::string shrink_name(ShrinkMode m) {
  switch (m) {
    case ShrinkMode::None: return "none";
    case ShrinkMode::Renormalize: return "renorm";
    case ShrinkMode::Shrink2x2: return "2x2";
  }
  return "none";
}

inline std::string subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::Estimate: return "estimate";
    case Subcommand::Test: return "test";
    case Subcommand::Simulate: return "simulate";
  }
  return "estimate";
}

// Every effective field is echoed, defaulted or not.
inline Json config_json(const RunConfig& cfg) {
  Json j;
  j["subcommand"] = subcommand_name(cfg.subcommand);
  j["input"] = cfg.input;
  j["dims"] = cfg.dims;
  j["weight"] = cfg.weight;
  j["regime"] = cfg.regime == DRegime::Estimated ? "estimated-d" : "known-d";
  j["estimators"] = cfg.estimators == EstimatorSet::MdOnestep
                        ? Json::array({"md", "onestep"})
                        : Json::array({"md"});
  j["shrink"] = shrink_name(cfg.shrink);
  j["out"] = cfg.out;
  j["seed"] = cfg.seed;
  j["reps"] = cfg.reps;
  j["workers"] = cfg.workers;
  j["T"] = cfg.t_obs;
  j["t_grid"] = cfg.t_grid;
  j["theta0"] = cfg.theta0;
  j["d0"] = cfg.d0;
  j["innovation"] = cfg.innovation;
  return j;
}

inline WeightSpec parse_weight(const std::string& w) {
  if (w == "identity") return WeightSpec::identity();
  if (w == "optimal") return WeightSpec::feasible_optimal();
  const std::string prefix = "file:";
  if (w.rfind(prefix, 0) == 0) return WeightSpec::supplied(read_csv_matrix(w.substr(prefix.size())));
  throw std::invalid_argument("unknown weight spec '" + w + "'");
}

inline Json estimate_document(const RunConfig& cfg, const Panel& panel) {
  const FactorDims dims(cfg.dims);
  if (dims.n() != panel.n_series())
    throw DimensionMismatch("dims product " + std::to_string(dims.n()) +
                            " does not match panel width " + std::to_string(panel.n_series()));
  const DesignMatrix design = build_design(dims);

  std::optional<Vec> known_d;
  if (cfg.regime == DRegime::Known) {
    if (static_cast<int>(cfg.d0.size()) != dims.n())
      throw std::invalid_argument("known-d regime needs d0 of length n in the config");
    known_d = cfg.d0;
  }
  const MomentSet moments = compute_moments(panel, known_d);
  const MdEstimate md = md_estimate(moments, design, parse_weight(cfg.weight));

  Json doc;
  doc["tool"] = {{"name", "kronfit"}, {"version", kVersion}};
  doc["config"] = config_json(cfg);
  doc["data"] = {{"path", cfg.input}, {"T", panel.t_obs()}, {"n", panel.n_series()},
                 {"columns", panel.names}};

  Json est;
  {
    Json mdj;
    mdj["theta"] = md.theta;
    Vec se(md.theta.size());
    for (size_t i = 0; i < se.size(); ++i)
      se[i] = std::sqrt(md.j(static_cast<int>(i), static_cast<int>(i)) / moments.t_obs);
    mdj["se"] = se;
    mdj["J"] = matrix_json(md.j);
    mdj["weight_clipped_eigenvalues"] = md.weight_clipped;
    est["md"] = std::move(mdj);
  }
  if (cfg.estimators == EstimatorSet::MdOnestep) {
    try {
      const LikelihoodContext ctx = make_likelihood_context(moments, design);
      const OneStepEstimate os = one_step(md, ctx);
      Json osj;
      osj["theta"] = os.theta_tilde;
      Vec se(os.theta_tilde.size());
      for (size_t i = 0; i < se.size(); ++i)
        se[i] = std::sqrt(os.variance(static_cast<int>(i), static_cast<int>(i)));
      osj["se"] = se;
      osj["upsilon"] = matrix_json(os.upsilon_hat);
      est["onestep"] = std::move(osj);
    } catch (const HessianNotPd& e) {
      est["onestep"] = {{"error", e.what()}};
    }
  }
  doc["estimates"] = std::move(est);

  const std::vector<SymMatrix> logs = theta_to_factor_logs(design, md.theta);
  Json raw = Json::array();
  for (const SymMatrix& lg : logs) raw.push_back(matrix_json(spd_exp(lg).matrix()));
  doc["factors"] = {{"raw", std::move(raw)}};

  const CorrelationResult corr = theta_to_correlation(design, md.theta);
  doc["correlation"] = {{"matrix", matrix_json(corr.theta.matrix())},
                        {"max_diag_deviation", corr.max_diag_deviation}};

  if (cfg.shrink == ShrinkMode::Renormalize) {
    doc["shrunk"] = {{"mode", "renorm"},
                     {"matrix", matrix_json(renormalize(corr.theta).matrix())}};
  } else if (cfg.shrink == ShrinkMode::Shrink2x2) {
    const ShrinkModelResult sm = shrink_model(design, md.theta);
    Json factors = Json::array();
    for (const ShrinkFactorResult& f : sm.factors) factors.push_back(matrix_json(f.correlation));
    doc["shrunk"] = {{"mode", "2x2"},
                     {"factors", std::move(factors)},
                     {"matrix", matrix_json(sm.correlation.matrix())}};
  } else {
    doc["shrunk"] = nullptr;
  }

  if (vech_size(dims.n()) - design.s() >= 1) {
    const TestResult tr = overid_test(moments, design);
    doc["overid"] = {{"statistic", tr.statistic}, {"df", tr.df},
                     {"p_chi2", tr.p_chi2},       {"z_diag", tr.z_diag},
                     {"p_normal", tr.p_normal},   {"clipped_eigenvalues", tr.clipped}};
  } else {
    doc["overid"] = nullptr;
  }
  return doc;
}

inline Json simulate_document(const RunConfig& cfg) {
  const FactorDims dims(cfg.dims);
  ThetaVector theta0 = cfg.theta0;
  if (theta0.empty()) theta0.assign(static_cast<size_t>(dims.s()), 0.0);
  Vec d0 = cfg.d0;
  if (d0.empty()) d0.assign(static_cast<size_t>(dims.n()), 1.0);
  const Innovation innov = parse_innovation(cfg.innovation);

  std::vector<long> ts = cfg.t_grid;
  if (ts.empty()) ts.push_back(cfg.t_obs);
  std::vector<DgpSpec> grid;
  for (long t : ts) grid.emplace_back(dims, theta0, d0, innov, t, cfg.seed);

  StudyOptions opt;
  opt.run_md = true;
  opt.run_md_known = true;
  opt.run_onestep = cfg.estimators == EstimatorSet::MdOnestep;
  opt.run_overid = vech_size(dims.n()) > dims.s();
  opt.run_vhat = innov.kind == Innovation::Kind::Gaussian;
  opt.workers = cfg.workers;
  const McSummary summary = run_study(grid, cfg.reps, opt);

  Json cells = Json::array();
  for (const CellSummary& c : summary.cells) {
    Json cj;
    cj["dims"] = c.dims_label;
    cj["T"] = c.t_obs;
    cj["reps"] = c.reps;
    cj["failures"] = c.failures;
    cj["invalid"] = c.invalid;
    cj["md"] = {{"bias", c.md_bias},       {"rmse", c.md_rmse},
                {"t_mean", c.md_t_mean},   {"t_var", c.md_t_var},
                {"coverage", c.md_coverage}, {"ks", c.md_ks}};
    cj["md_known"] = {{"var_sqrtT_c", c.md_known_var_c}};
    if (opt.run_onestep)
      cj["onestep"] = {{"var_sqrtT_c", c.onestep_var_c}, {"coverage", c.onestep_coverage}};
    if (opt.run_overid) cj["overid"] = {{"reject_rate", c.overid_reject}};
    if (opt.run_vhat) cj["vhat"] = {{"median_inf_err", c.vhat_median_err}};
    cells.push_back(std::move(cj));
  }

  Json doc;
  doc["tool"] = {{"name", "kronfit"}, {"version", kVersion}};
  doc["config"] = config_json(cfg);
  doc["summary"] = {{"cells", std::move(cells)},
                    {"rmse_ratios", summary.rmse_ratios},
                    {"vhat_ratios", summary.vhat_ratios}};
  return doc;
}

}  // namespace detail

// Exit codes: 0 success, 2 data error, 3 numerical failure.
inline int run(const RunConfig& cfg, std::ostream& err = std::cerr) {
  try {
    Json doc;
    if (cfg.subcommand == Subcommand::Simulate) {
      doc = detail::simulate_document(cfg);
    } else {
      const Panel panel = ingest_csv(cfg.input);
      doc = detail::estimate_document(cfg, panel);
      if (cfg.subcommand == Subcommand::Test && doc["overid"].is_null()) throw NotOveridentified();
    }
    const std::string text = doc.dump(2) + "\n";
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(cfg.out, std::ios::binary);
      if (!out) {
        err << "kronfit: cannot write " << cfg.out << "\n";
        return 2;
      }
      out << text;
    }
    return 0;
  } catch (const EmptyFile& e) {
    err << "kronfit: " << e.what() << "\n";
    return 2;
  } catch (const RaggedRows& e) {
    err << "kronfit: " << e.what() << "\n";
    return 2;
  } catch (const NonNumericCell& e) {
    err << "kronfit: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "kronfit: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "kronfit: " << e.what() << "\n";
    return 3;
  }
}

// Reads KRONFIT_EIG_TOL into the eigensolver tolerance; call once at startup.
inline void apply_environment() {
  if (const char* tol = std::getenv("KRONFIT_EIG_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(tol, &end);
    if (end != tol && v > 0.0) eig_tolerance() = v;
  }
}

}  // namespace kronfit
