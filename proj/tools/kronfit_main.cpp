#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kronfit/cli.hpp"

namespace {

// Config-file values are loaded first; command-line flags override because
// CLI11 only writes bound variables when the option is actually present.
void load_config_file(const std::string& path, kronfit::RunConfig& cfg, std::string& dims,
                      std::string& regime, std::string& shrink, std::string& estimators) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  kronfit::Json j;
  in >> j;
  if (j.contains("input")) cfg.input = j["input"].get<std::string>();
  if (j.contains("dims")) dims = j["dims"].get<std::string>();
  if (j.contains("weight")) cfg.weight = j["weight"].get<std::string>();
  if (j.contains("regime")) regime = j["regime"].get<std::string>();
  if (j.contains("estimators")) estimators = j["estimators"].get<std::string>();
  if (j.contains("shrink")) shrink = j["shrink"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("reps")) cfg.reps = j["reps"].get<int>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  if (j.contains("T")) cfg.t_obs = j["T"].get<long>();
  if (j.contains("t_grid")) cfg.t_grid = j["t_grid"].get<std::vector<long>>();
  if (j.contains("theta0")) cfg.theta0 = j["theta0"].get<kronfit::Vec>();
  if (j.contains("d0")) cfg.d0 = j["d0"].get<kronfit::Vec>();
  if (j.contains("innovation")) cfg.innovation = j["innovation"].get<std::string>();
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
}

void finish_config(kronfit::RunConfig& cfg, const std::string& dims, const std::string& regime,
                   const std::string& shrink, const std::string& estimators) {
  cfg.dims = kronfit::detail::parse_dims(dims);
  if (regime == "known-d") {
    cfg.regime = kronfit::DRegime::Known;
  } else if (regime == "estimated-d" || regime.empty()) {
    cfg.regime = kronfit::DRegime::Estimated;
  } else {
    throw CLI::ValidationError("--regime", "must be estimated-d or known-d");
  }
  if (shrink == "renorm") {
    cfg.shrink = kronfit::ShrinkMode::Renormalize;
  } else if (shrink == "2x2") {
    cfg.shrink = kronfit::ShrinkMode::Shrink2x2;
  } else if (shrink == "none" || shrink.empty()) {
    cfg.shrink = kronfit::ShrinkMode::None;
  } else {
    throw CLI::ValidationError("--shrink", "must be none, renorm or 2x2");
  }
  if (estimators == "md") {
    cfg.estimators = kronfit::EstimatorSet::Md;
  } else if (estimators == "md,onestep" || estimators.empty()) {
    cfg.estimators = kronfit::EstimatorSet::MdOnestep;
  } else {
    throw CLI::ValidationError("--estimators", "must be md or md,onestep");
  }
}

std::string prescan_config_path(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") return argv[i + 1];
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  kronfit::apply_environment();

  CLI::App app{"kronfit: Kronecker-structured correlation estimation"};
  app.require_subcommand(1);

  kronfit::RunConfig cfg;
  std::string dims, regime, shrink, estimators, config_path;

  CLI::App* est = app.add_subcommand("estimate", "estimate the log-correlation parameters");
  CLI::App* test = app.add_subcommand("test", "over-identification test of the Kronecker null");
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study of the estimators");

  est->add_option("input", cfg.input, "CSV panel, rows = time");
  test->add_option("input", cfg.input, "CSV panel, rows = time");
  sim->add_option("--reps", cfg.reps, "replications per cell");
  sim->add_option("--workers", cfg.workers, "worker threads");
  sim->add_option("--T", cfg.t_obs, "sample size");
  sim->add_option("--innovation", cfg.innovation, "gaussian | student-t:DF");

  for (CLI::App* cmd : {est, test, sim}) {
    cmd->add_option("--dims", dims, "factor dimensions, e.g. 2x2x3");
    cmd->add_option("--weight", cfg.weight, "identity | optimal | file:PATH");
    cmd->add_option("--regime", regime, "estimated-d | known-d");
    cmd->add_option("--estimators", estimators, "md | md,onestep");
    cmd->add_option("--shrink", shrink, "none | renorm | 2x2");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--out", cfg.out, "output path (default: stdout)");
    cmd->add_option("--config", config_path, "JSON config file (flags override)");
  }

  try {
    const std::string pre = prescan_config_path(argc, argv);
    if (!pre.empty()) load_config_file(pre, cfg, dims, regime, shrink, estimators);
    app.parse(argc, argv);
    if (dims.empty()) throw CLI::ValidationError("--dims", "is required (flag or config file)");
    if ((est->parsed() || test->parsed()) && cfg.input.empty())
      throw CLI::ValidationError("input", "is required (argument or config file)");
    finish_config(cfg, dims, regime, shrink, estimators);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (est->parsed()) cfg.subcommand = kronfit::Subcommand::Estimate;
  if (test->parsed()) cfg.subcommand = kronfit::Subcommand::Test;
  if (sim->parsed()) cfg.subcommand = kronfit::Subcommand::Simulate;

  return kronfit::run(cfg);
}
