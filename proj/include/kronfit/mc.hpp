#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kronfit/infer.hpp"
#include "kronfit/mdest.hpp"
#include "kronfit/qmle.hpp"
#include "kronfit/rng.hpp"

namespace kronfit {

struct Innovation {
  enum class Kind { Gaussian, StudentT };
  Kind kind = Kind::Gaussian;
  int df = 0;

  static Innovation gaussian() { return {Kind::Gaussian, 0}; }
  static Innovation student_t(int df) { return {Kind::StudentT, df}; }
};

// A data-generating cell: y_t = Sigma^{1/2} eps_t with
// Sigma = D^{1/2} Theta(theta0) D^{1/2}. Student-t innovations need df > 8 so
// the fourth-moment matrix V stays finite with margin.
struct DgpSpec {
  FactorDims dims;
  ThetaVector theta0;
  Vec d0;
  Innovation innovation = Innovation::gaussian();
  long t_obs = 0;
  std::uint64_t seed = 0;

  DgpSpec(FactorDims dims_, ThetaVector theta0_, Vec d0_, Innovation innov, long t, std::uint64_t sd)
      : dims(std::move(dims_)),
        theta0(std::move(theta0_)),
        d0(std::move(d0_)),
        innovation(innov),
        t_obs(t),
        seed(sd) {
    if (static_cast<int>(theta0.size()) != dims.s())
      throw DimensionMismatch("theta0 length does not match dims");
    if (static_cast<int>(d0.size()) != dims.n()) throw DimensionMismatch("d0 length");
    for (double d : d0)
      if (!(d > 0.0)) throw std::invalid_argument("d0 entries must be positive");
    if (innovation.kind == Innovation::Kind::StudentT && innovation.df <= 8)
      throw std::invalid_argument("Student-t innovations require df > 8");
    if (t_obs < 2) throw std::invalid_argument("T must be at least 2");
  }
};

inline SpdMatrix dgp_sigma(const DgpSpec& spec) {
  const DesignMatrix design = build_design(spec.dims);
  const SpdMatrix theta = theta_to_correlation(design, spec.theta0).theta;
  const int n = spec.dims.n();
  Matrix sigma(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sigma(i, j) = theta(i, j) * std::sqrt(spec.d0[static_cast<size_t>(i)] * spec.d0[static_cast<size_t>(j)]);
  return SpdMatrix(std::move(sigma));
}

// Draws a panel from an arbitrary covariance; building block for both the
// null DGP and alternatives constructed directly by callers.
inline Panel simulate_panel_from_sigma(const SpdMatrix& sigma, long t_obs, std::uint64_t seed,
                                       Innovation innovation = Innovation::gaussian()) {
  const int n = sigma.dim();
  const Matrix root = spd_power(sigma, 0.5).matrix();
  Rng rng(seed);
  Panel panel;
  panel.data = Matrix(static_cast<int>(t_obs), n);
  Vec eps(static_cast<size_t>(n));
  for (long t = 0; t < t_obs; ++t) {
    for (int i = 0; i < n; ++i)
      eps[static_cast<size_t>(i)] = innovation.kind == Innovation::Kind::Gaussian
                                        ? rng.normal()
                                        : rng.student_t_standardized(innovation.df);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += root(i, j) * eps[static_cast<size_t>(j)];
      panel.data(static_cast<int>(t), i) = acc;
    }
  }
  return panel;
}

inline Panel simulate_panel(const DgpSpec& spec) {
  return simulate_panel_from_sigma(dgp_sigma(spec), spec.t_obs, spec.seed, spec.innovation);
}

struct StudyOptions {
  bool run_md = true;         // estimated-D MD with W = I, studentized by J_hat
  bool run_md_known = false;  // known-D MD with W = I (efficiency baseline)
  bool run_onestep = false;   // known-D one-step started from the known-D MD
  bool run_overid = false;    // known-D over-identification test at 5%
  bool run_vhat = false;      // max-norm error of V_hat against the Gaussian V
  int contrast = 0;           // coordinate of theta used for studentized checks
  int workers = 1;
  double alpha = 0.05;
};

struct CellSummary {
  std::string dims_label;
  long t_obs = 0;
  int reps = 0;
  int failures = 0;
  bool invalid = false;  // more than 1% of replications failed

  Vec md_bias;        // mean(theta_hat) - theta0
  double md_rmse = 0.0;
  double md_t_mean = 0.0;
  double md_t_var = 0.0;
  double md_coverage = 0.0;
  double md_ks = 0.0;  // Kolmogorov-Smirnov distance of the studentized stat to N(0,1)

  double md_known_var_c = 0.0;  // sample variance of sqrt(T) c^T theta_hat (known D, W = I)
  double onestep_var_c = 0.0;   // same for the one-step
  double onestep_coverage = 0.0;

  double overid_reject = 0.0;
  double vhat_median_err = 0.0;
};

struct McSummary {
  std::vector<CellSummary> cells;
  // ratios between consecutive cells of the grid (cell k over cell k+1)
  Vec rmse_ratios;
  Vec vhat_ratios;
};

namespace detail {

struct RepRecord {
  bool failed = false;
  Vec theta_md;
  double t_md = 0.0;
  bool covered_md = false;
  double ct_md_known = 0.0;
  double ct_onestep = 0.0;
  bool covered_onestep = false;
  bool overid_reject = false;
  double vhat_err = 0.0;
};

inline double ks_distance_normal(Vec xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i]);
    d = std::max(d, std::fabs((i + 1.0) / n - f));
    d = std::max(d, std::fabs(f - i / n));
  }
  return d;
}

inline double median(Vec xs) {
  std::sort(xs.begin(), xs.end());
  const size_t m = xs.size();
  return m % 2 == 1 ? xs[m / 2] : 0.5 * (xs[m / 2 - 1] + xs[m / 2]);
}

inline RepRecord run_one_rep(const DgpSpec& spec, const DesignMatrix& design,
                             const SpdMatrix& sigma0, const Matrix& v_pop,
                             const StudyOptions& opt, int rep) {
  RepRecord rec;
  try {
    const Panel panel =
        simulate_panel_from_sigma(sigma0, spec.t_obs, spec.seed ^ static_cast<std::uint64_t>(rep),
                                  spec.innovation);
    const double z975 = 1.959963984540054;
    const size_t c = static_cast<size_t>(opt.contrast);
    const double truth = spec.theta0[c];

    if (opt.run_md) {
      const MomentSet moments = compute_moments(panel);
      const MdEstimate md = md_estimate(moments, design, WeightSpec::identity());
      rec.theta_md = md.theta;
      const double se = std::sqrt(md.j(opt.contrast, opt.contrast) / spec.t_obs);
      rec.t_md = (md.theta[c] - truth) / se;
      rec.covered_md = std::fabs(rec.t_md) <= z975;
      if (opt.run_vhat) rec.vhat_err = (moments.v_hat - v_pop).max_abs();
    }

    if (opt.run_md_known || opt.run_onestep || opt.run_overid) {
      const MomentSet moments_k = compute_moments(panel, spec.d0);
      if (opt.run_md_known || opt.run_onestep) {
        const MdEstimate md_k = md_estimate(moments_k, design, WeightSpec::identity());
        rec.ct_md_known = std::sqrt(static_cast<double>(spec.t_obs)) * md_k.theta[c];
        if (opt.run_onestep) {
          const LikelihoodContext ctx = make_likelihood_context(moments_k, design);
          const OneStepEstimate os = one_step(md_k, ctx);
          rec.ct_onestep = std::sqrt(static_cast<double>(spec.t_obs)) * os.theta_tilde[c];
          const double se = std::sqrt(os.variance(opt.contrast, opt.contrast));
          rec.covered_onestep = std::fabs(os.theta_tilde[c] - truth) <= z975 * se;
        }
      }
      if (opt.run_overid) {
        const TestResult tr = overid_test(moments_k, design);
        rec.overid_reject = tr.p_chi2 < opt.alpha;
      }
    }
  } catch (const std::exception&) {
    rec.failed = true;
  }
  return rec;
}

}  // namespace detail

// Runs `reps` replications of each cell in the grid. Replications are
// independent tasks with their own derived RNG stream; records land in
// per-replication slots and aggregation walks them in order, so the summary is
// identical for any worker count.
inline McSummary run_study(const std::vector<DgpSpec>& grid, int reps, const StudyOptions& opt) {
  if (reps < 200) throw std::invalid_argument("replication budget must be at least 200 per cell");
  McSummary summary;

  for (const DgpSpec& spec : grid) {
    const DesignMatrix design = build_design(spec.dims);
    const SpdMatrix sigma0 = dgp_sigma(spec);
    const Matrix v_pop = opt.run_vhat ? gaussian_v(sigma0.matrix()) : Matrix();

    std::vector<detail::RepRecord> records(static_cast<size_t>(reps));
    const int workers = std::max(1, opt.workers);
    if (workers == 1) {
      for (int r = 0; r < reps; ++r)
        records[static_cast<size_t>(r)] = detail::run_one_rep(spec, design, sigma0, v_pop, opt, r);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int wkr = 0; wkr < workers; ++wkr) {
        pool.emplace_back([&]() {
          for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1))
            records[static_cast<size_t>(r)] = detail::run_one_rep(spec, design, sigma0, v_pop, opt, r);
        });
      }
      for (std::thread& th : pool) th.join();
    }

    CellSummary cell;
    cell.t_obs = spec.t_obs;
    cell.reps = reps;
    for (size_t j = 0; j < spec.dims.dims().size(); ++j)
      cell.dims_label += (j ? "x" : "") + std::to_string(spec.dims.dims()[j]);

    Vec tstats, ct_known, ct_os, vhat_errs;
    Vec theta_sum(spec.theta0.size(), 0.0);
    double sq_err_sum = 0.0;
    int ok = 0, cov_md = 0, cov_os = 0, rej = 0;
    for (const detail::RepRecord& rec : records) {
      if (rec.failed) {
        ++cell.failures;
        continue;
      }
      ++ok;
      if (opt.run_md) {
        for (size_t i = 0; i < theta_sum.size(); ++i) theta_sum[i] += rec.theta_md[i];
        double e2 = 0.0;
        for (size_t i = 0; i < theta_sum.size(); ++i) {
          const double d = rec.theta_md[i] - spec.theta0[i];
          e2 += d * d;
        }
        sq_err_sum += e2;
        tstats.push_back(rec.t_md);
        cov_md += rec.covered_md ? 1 : 0;
        if (opt.run_vhat) vhat_errs.push_back(rec.vhat_err);
      }
      if (opt.run_md_known || opt.run_onestep) ct_known.push_back(rec.ct_md_known);
      if (opt.run_onestep) {
        ct_os.push_back(rec.ct_onestep);
        cov_os += rec.covered_onestep ? 1 : 0;
      }
      rej += rec.overid_reject ? 1 : 0;
    }
    if (ok == 0) throw std::runtime_error("every replication failed in cell " + cell.dims_label);
    cell.invalid = cell.failures > reps / 100;

    auto sample_var = [](const Vec& xs) {
      double m = 0.0;
      for (double x : xs) m += x;
      m /= static_cast<double>(xs.size());
      double v = 0.0;
      for (double x : xs) v += (x - m) * (x - m);
      return v / (static_cast<double>(xs.size()) - 1.0);
    };

    if (opt.run_md) {
      cell.md_bias.resize(theta_sum.size());
      for (size_t i = 0; i < theta_sum.size(); ++i) cell.md_bias[i] = theta_sum[i] / ok - spec.theta0[i];
      cell.md_rmse = std::sqrt(sq_err_sum / ok);
      double tm = 0.0;
      for (double t : tstats) tm += t;
      cell.md_t_mean = tm / ok;
      cell.md_t_var = sample_var(tstats);
      cell.md_coverage = static_cast<double>(cov_md) / ok;
      cell.md_ks = detail::ks_distance_normal(tstats);
      if (opt.run_vhat) cell.vhat_median_err = detail::median(vhat_errs);
    }
    if (opt.run_md_known || opt.run_onestep) cell.md_known_var_c = sample_var(ct_known);
    if (opt.run_onestep) {
      cell.onestep_var_c = sample_var(ct_os);
      cell.onestep_coverage = static_cast<double>(cov_os) / ok;
    }
    if (opt.run_overid) cell.overid_reject = static_cast<double>(rej) / ok;

    summary.cells.push_back(std::move(cell));
  }

  for (size_t k = 0; k + 1 < summary.cells.size(); ++k) {
    if (opt.run_md && summary.cells[k + 1].md_rmse > 0.0)
      summary.rmse_ratios.push_back(summary.cells[k].md_rmse / summary.cells[k + 1].md_rmse);
    if (opt.run_vhat && summary.cells[k + 1].vhat_median_err > 0.0)
      summary.vhat_ratios.push_back(summary.cells[k].vhat_median_err /
                                    summary.cells[k + 1].vhat_median_err);
  }
  return summary;
}

}  // namespace kronfit
