// Acceptance suite: every release-gating criterion runs here, one pass/fail
// line each. Criteria share the expensive artifacts (tier-fitted surrogates,
// large reference runs) where setups coincide.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "floodgate/cli.hpp"
#include "floodgate/dataset.hpp"
#include "floodgate/errors.hpp"
#include "floodgate/estimators.hpp"
#include "floodgate/harness.hpp"
#include "floodgate/io.hpp"
#include "floodgate/models.hpp"
#include "floodgate/rng.hpp"
#include "floodgate/stats.hpp"
#include "floodgate/surrogate.hpp"

using namespace floodgate;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

void run_parallel_trials(std::size_t trials, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), trials));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= trials) return;
        fn(t);
      }
    });
  for (auto& th : pool) th.join();
}

// Shared Ishigami setup for criteria 4, 5, 6, and 10.
struct IshigamiSetup {
  ModelFunction model = ishigami(7.0, 0.1);
  InputSpace space = ishigami_space();
  std::shared_ptr<KrrSurrogate> surrogate;
  RelativeMse quality;
};

const IshigamiSetup& ishigami_setup() {
  static const IshigamiSetup setup = [] {
    IshigamiSetup s;
    TierFitResult tier = fit_krr_to_tier(s.model, s.space, 0.05, 2048, 1001);
    s.quality = tier.achieved;
    s.surrogate = std::make_shared<KrrSurrogate>(std::move(tier.surrogate));
    std::cerr << "[setup] ishigami KRR tier: size=" << tier.train_size
              << " gamma=" << fmt(tier.gamma) << " E2=" << fmt(s.quality.e2) << " (se "
              << fmt(s.quality.se) << ")\n";
    return s;
  }();
  return setup;
}

// ---------------------------------------------------------------------------
// 1. Jansen equivalence: f = f*, K = 1, shared resamples.
// ---------------------------------------------------------------------------
Check criterion_1() {
  Check c;
  Rng gen(42);
  std::size_t degenerate = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + gen.uniform_index(5);
    const std::size_t n = 3 + gen.uniform_index(198);
    std::vector<double> coeffs(d);
    for (auto& co : coeffs) co = gen.uniform(-2.0, 2.0);
    const InputSpace space = InputSpace::uniform_cube(d);
    const ModelFunction model = additive_linear(coeffs);
    const PairedDataset pairs = build_paired_dataset(model, space, n, gen.next_u64());
    for (std::size_t j = 0; j < d; ++j) {
      const IntervalResult spf = spf_jansen(pairs, j, 0.05);
      const Matrix f_res = pairs.paired_outputs.col(static_cast<Eigen::Index>(j));
      const IntervalResult fg = floodgate_interval(
          floodgate_terms_from_values(j, pairs.base.outputs, pairs.base.outputs, f_res), 0.05);
      if (spf.diagnostics.degenerate) {
        ++degenerate;
        c.require(fg.diagnostics.degenerate, "degenerate mismatch");
        continue;
      }
      const double s_hat = spf.point_lower;
      const double tol = 1e-12 * std::max({1.0, std::abs(s_hat)});
      c.require(std::abs(fg.point_lower - s_hat) <= tol &&
                    std::abs(fg.point_upper - s_hat) <= tol,
                "rep " + std::to_string(rep) + " input " + std::to_string(j) +
                    ": l/u != Jansen (" + fmt(fg.point_lower, 17) + ", " +
                    fmt(fg.point_upper, 17) + " vs " + fmt(s_hat, 17) + ")");
    }
  }
  c.note("100 datasets, degenerate=" + std::to_string(degenerate));
  return c;
}

// ---------------------------------------------------------------------------
// 2. Hand-arithmetic oracle (n = 3 worked example).
// ---------------------------------------------------------------------------
Check criterion_2() {
  Check c;
  const std::vector<double> y{1.0, 2.0, 3.0};
  Matrix f_res(3, 1);
  f_res << 2.0, 1.0, 3.0;
  const FloodgateTerms terms = floodgate_terms_from_values(0, y, y, f_res);
  c.require(terms.m == std::vector<double>{0.0, 0.0, 0.0}, "M != (0,0,0)");
  c.require(terms.m_z == std::vector<double>{0.5, 0.5, 0.0}, "M^z != (0.5,0.5,0)");
  c.require(terms.v == std::vector<double>{1.5, 0.0, 1.5}, "V != (1.5,0,1.5)");
  const IntervalResult r = floodgate_interval(terms, 0.05);
  c.require(std::abs(r.point_lower - 1.0 / 3.0) < 1e-15 &&
                std::abs(r.point_upper - 1.0 / 3.0) < 1e-15,
            "l,u != 1/3");
  return c;
}

// ---------------------------------------------------------------------------
// 3. Lemma-2 unbiasedness of M^z against the closed form.
// ---------------------------------------------------------------------------
Check criterion_3() {
  Check c;
  // f* = x1 + 2 x2, f = 1.15 x1 + 1.8 x2, input 1 (0-based index 0):
  // MSE(f_z) = E[(a1 X - b1/2 + (a2-b2) Z)^2] with X, Z ~ U(0,1).
  const double a1 = 1.0, a2 = 2.0, b1 = 1.15, b2 = 1.8;
  const double ea2 = a1 * a1 / 3.0 - a1 * b1 / 2.0 + b1 * b1 / 4.0;
  const double ea = (a1 - b1) / 2.0;
  const double eb = (a2 - b2) / 2.0;
  const double eb2 = (a2 - b2) * (a2 - b2) / 3.0;
  const double mse_fz = ea2 + 2.0 * ea * eb + eb2;

  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({a1, a2});
  const FunctionSurrogate f("lin", 2, [=](std::span<const double> x) {
    return b1 * x[0] + b2 * x[1];
  });

  const std::size_t reps = 10000, n = 50;
  std::vector<double> mz_means(reps);
  run_parallel_trials(reps, [&](std::size_t rep) {
    const std::uint64_t seed = Rng::derive_seed(404, "lemma2", {rep});
    EvaluatedDataset data = make_dataset(model, space, n, seed, "rep");
    const FloodgateTerms terms = floodgate_terms(data, f, space, 0, 1, seed);
    mz_means[rep] = mean(terms.m_z);
  });
  const double grand = mean(mz_means);
  const double se = std::sqrt(sample_variance(mz_means) / static_cast<double>(reps));
  c.require(std::abs(grand - mse_fz) <= 3.0 * se,
            "mean Mz_bar = " + fmt(grand, 6) + " vs closed form " + fmt(mse_fz, 6) +
                " (3 se = " + fmt(3.0 * se, 3) + ")");
  c.note("mean=" + fmt(grand, 6) + " target=" + fmt(mse_fz, 6) + " se=" + fmt(se, 3));
  return c;
}

// ---------------------------------------------------------------------------
// 4. Theorem-1 coverage on Ishigami with a KRR surrogate.
// ---------------------------------------------------------------------------
Check criterion_4() {
  Check c;
  const IshigamiSetup& setup = ishigami_setup();
  c.note("E2=" + fmt(setup.quality.e2));

  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate};
  cfg.budgets = {100, 1000, 10000};
  cfg.trials = 1000;
  cfg.alpha = 0.05;
  cfg.K = 1;
  cfg.seed = 8001;

  ResolvedExperiment exp{setup.model, setup.space, setup.surrogate, setup.quality, {}, cfg, 0};
  exp.truth.values = *setup.model.known_total_indices();
  exp.truth.stderrs.assign(3, 0.0);
  exp.truth.source = "closed-form";

  const CoverageReport report = run_coverage_experiment(exp);
  for (const auto& cell : report.cells) {
    if (cell.N < 1000) continue;  // gated at n >= 1e3
    c.require(cell.coverage >= 0.93, "coverage " + fmt(cell.coverage) + " at n=" +
                                         std::to_string(cell.N) + " input " +
                                         std::to_string(cell.input));
  }
  std::string cov = "coverage(n=1000,10000):";
  for (const auto& cell : report.cells)
    if (cell.N >= 1000) cov += " " + fmt(cell.coverage, 3);
  c.note(cov);
  return c;
}

// ---------------------------------------------------------------------------
// 5. Theorem-2 excess-width rate (log-log slope in [-0.65, -0.35]).
// ---------------------------------------------------------------------------
Check criterion_5() {
  Check c;
  const IshigamiSetup& setup = ishigami_setup();
  const std::vector<std::size_t> ns{100, 316, 1000, 3162, 10000, 31623, 100000};
  const std::vector<std::size_t> trials{400, 300, 200, 120, 60, 30, 16};

  std::vector<std::vector<double>> mean_excess(3, std::vector<double>(ns.size(), 0.0));
  for (std::size_t bi = 0; bi < ns.size(); ++bi) {
    ExperimentConfig cfg;
    cfg.methods = {Method::Floodgate};
    cfg.budgets = {ns[bi]};
    cfg.trials = trials[bi];
    cfg.alpha = 0.05;
    cfg.seed = Rng::derive_seed(8002, "rate", {bi});
    ResolvedExperiment exp{setup.model, setup.space, setup.surrogate, setup.quality, {}, cfg, 0};
    exp.truth.values = *setup.model.known_total_indices();
    exp.truth.stderrs.assign(3, 0.0);
    exp.truth.source = "closed-form";
    const CoverageReport report = run_coverage_experiment(exp);
    for (const auto& cell : report.cells) mean_excess[cell.input][bi] = cell.mean_excess_width;
  }

  std::vector<double> log_n(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) log_n[i] = std::log(static_cast<double>(ns[i]));
  std::string slopes = "slopes:";
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> log_w;
    std::vector<double> log_n_used;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (mean_excess[j][i] > 0.0) {
        log_w.push_back(std::log(mean_excess[j][i]));
        log_n_used.push_back(log_n[i]);
      }
    }
    const double slope = ols_slope(log_n_used, log_w);
    slopes += " " + fmt(slope, 3);
    c.require(slope >= -0.65 && slope <= -0.35,
              "input " + std::to_string(j) + " slope " + fmt(slope, 3) + " outside [-0.65,-0.35]");
  }
  c.note(slopes);
  return c;
}

// ---------------------------------------------------------------------------
// 6. Bound-comparison dominance: floodgate narrower than the bound-based
//    interval, per trial and at population scale.
// ---------------------------------------------------------------------------
Check criterion_6() {
  Check c;
  const IshigamiSetup& setup = ishigami_setup();
  const std::size_t trials = 500, n = 1000;
  const std::size_t d = 3;

  std::atomic<std::size_t> qualifying{0}, narrower{0};
  run_parallel_trials(trials, [&](std::size_t t) {
    const std::uint64_t ts = Rng::derive_seed(8003, "dominance", {t});
    EvaluatedDataset data = make_dataset(setup.model, setup.space, n, ts, "fg-data");
    const Vector fb = setup.surrogate->predict_block(data.inputs);
    data.surrogate_outputs.assign(fb.data(), fb.data() + fb.size());
    const auto fg = floodgate_all_inputs(data, *setup.surrogate, setup.space, 1,
                                         Rng::derive_seed(ts, "fg-resample"), 0.05);
    const PairedDataset pairs = build_paired_dataset(
        static_cast<const Surrogate&>(*setup.surrogate), setup.space, n,
        Rng::derive_seed(ts, "panin-pairs"));
    const RelativeMse rel =
        estimate_relative_mse_from_values(data.outputs, data.surrogate_outputs);
    for (std::size_t j = 0; j < d; ++j) {
      const IntervalResult pn = panin_from_data(pairs, data, *setup.surrogate, j, 0.05);
      const double s_hat_f = spf_surrogate(pairs, j, 0.05).point_lower;
      if (std::sqrt(std::max(rel.e2, 0.0)) < 1.0 && s_hat_f > 0.05 && s_hat_f < 0.95) {
        qualifying.fetch_add(1);
        if (fg[j].width() < pn.width()) narrower.fetch_add(1);
      }
    }
  });
  const double frac = static_cast<double>(narrower.load()) /
                      std::max<double>(1.0, static_cast<double>(qualifying.load()));
  c.require(qualifying.load() > 0, "no qualifying trials");
  c.require(frac >= 0.99, "floodgate narrower in only " + fmt(100.0 * frac, 4) + "% of trials");
  c.note("narrower in " + fmt(100.0 * frac, 4) + "% of " + std::to_string(qualifying.load()) +
         " qualifying (trial, input) pairs");

  // Population-level inequality on a deterministic grid.
  bool grid_ok = true;
  for (double e = 0.01; e < 1.0; e += 0.0099) {
    for (double s = 0.05; s <= 0.9501; s += 0.009) {
      const double b = std::min({1.0, e + 2.0 * std::sqrt(s), e + 2.0 * std::sqrt(1.0 - s)}) * e;
      if (!(e * e < 2.0 * b)) grid_ok = false;
    }
  }
  c.require(grid_ok, "population width inequality failed on the grid");
  return c;
}

// ---------------------------------------------------------------------------
// 7. Degenerate branch: constant model gives exactly [0, 1] for every input.
// ---------------------------------------------------------------------------
Check criterion_7() {
  Check c;
  const InputSpace space = InputSpace::uniform_cube(3);
  const ModelFunction model = constant_model(3, 2.5);
  EvaluatedDataset train = make_dataset(model, space, 64, 1, "train");
  const KrrSurrogate surrogate = fit_krr(train, space);  // recovers the constant exactly
  EvaluatedDataset data = make_dataset(model, space, 200, 2, "data");
  const auto results = floodgate_all_inputs(data, surrogate, space, 1, 3, 0.05);
  for (const auto& r : results) {
    c.require(r.lower == 0.0 && r.upper == 1.0,
              "input " + std::to_string(r.input_index) + " gave [" + fmt(r.lower) + ", " +
                  fmt(r.upper) + "]");
    c.require(r.diagnostics.degenerate, "degenerate flag missing");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 8. Surrogate-SPF non-coverage under bias vs floodgate validity.
// ---------------------------------------------------------------------------
Check criterion_8() {
  Check c;
  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({1.0, 2.0});
  // Deliberately biased surrogate: S^f = (0.566, 0.434) vs S = (0.2, 0.8).
  const FunctionSurrogate biased("biased", 2, [](std::span<const double> x) {
    return 1.6 * x[0] + 1.4 * x[1];
  });
  const std::vector<double> truth{0.2, 0.8};
  const std::size_t trials = 300, n = 100000;

  std::vector<std::array<int, 2>> fg_cover(trials), sf_cover(trials);
  run_parallel_trials(trials, [&](std::size_t t) {
    const std::uint64_t ts = Rng::derive_seed(8004, "bias", {t});
    EvaluatedDataset data = make_dataset(model, space, n, ts, "fg-data");
    const auto fg = floodgate_all_inputs(data, biased, space, 1,
                                         Rng::derive_seed(ts, "fg-resample"), 0.05);
    const PairedDataset pairs =
        build_paired_dataset(static_cast<const Surrogate&>(biased), space, n,
                             Rng::derive_seed(ts, "sf-pairs"));
    for (std::size_t j = 0; j < 2; ++j) {
      fg_cover[t][j] = fg[j].covers(truth[j]) ? 1 : 0;
      sf_cover[t][j] = spf_surrogate(pairs, j, 0.05).covers(truth[j]) ? 1 : 0;
    }
  });

  double worst_sf = 1.0;
  for (std::size_t j = 0; j < 2; ++j) {
    double fg_rate = 0.0, sf_rate = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      fg_rate += fg_cover[t][j];
      sf_rate += sf_cover[t][j];
    }
    fg_rate /= trials;
    sf_rate /= trials;
    worst_sf = std::min(worst_sf, sf_rate);
    c.require(fg_rate >= 0.93,
              "floodgate coverage " + fmt(fg_rate) + " for input " + std::to_string(j));
    c.note("input " + std::to_string(j) + ": fg=" + fmt(fg_rate, 3) + " sf=" + fmt(sf_rate, 3));
  }
  c.require(worst_sf < 0.10, "spf-surrogate coverage never fell below 10%");
  return c;
}

// ---------------------------------------------------------------------------
// 9. Budget-pattern reproduction on Hymod with synthetic forcing.
// ---------------------------------------------------------------------------
Check criterion_9() {
  Check c;
  const HymodParams truth_params{150.0, 0.8, 0.6, 0.05, 0.5};
  const ForcingSeries forcing = synthetic_forcing(365, 20240101, truth_params, 1.0);
  const ModelFunction model = hymod_nse_response(forcing);
  const InputSpace space = hymod_space();

  // High-quality tier: E2 <= 0.02, verified, never assumed.
  TierFitResult tier = fit_krr_to_tier(model, space, 0.015, 2048, 9001);
  c.require(tier.achieved.e2 <= 0.02,
            "high-quality tier not reached: E2 = " + fmt(tier.achieved.e2));
  c.note("tier E2=" + fmt(tier.achieved.e2) + " @ m=" + std::to_string(tier.train_size));
  auto surrogate = std::make_shared<KrrSurrogate>(std::move(tier.surrogate));

  // Ground truth cached once at n_large = 1e6 with its seed.
  const GroundTruth truth = ground_truth(model, space, 1000000, 9002);
  std::size_t top = 0;
  for (std::size_t j = 1; j < 5; ++j)
    if (truth.values[j] > truth.values[top]) top = j;
  std::string gts = "S =";
  for (double v : truth.values) gts += " " + fmt(v, 3);
  c.note(gts + "; top input = " + space.marginal(top).name);

  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate, Method::Spf};
  cfg.budgets = {100, 1000, 10000};
  cfg.trials = 200;
  cfg.alpha = 0.05;
  cfg.seed = 9003;
  ResolvedExperiment exp{model, space, surrogate, tier.achieved, truth, cfg, tier.fstar_evals};
  const CoverageReport report = run_coverage_experiment(exp);

  double fg_width = -1.0, spf_width = -1.0, fg_cov = -1.0, spf_cov = -1.0;
  for (const auto& cell : report.cells) {
    if (cell.N != 100 || cell.input != top || cell.skipped) continue;
    if (cell.method == Method::Floodgate) {
      fg_width = cell.mean_width;
      fg_cov = cell.coverage;
    } else if (cell.method == Method::Spf) {
      spf_width = cell.mean_width;
      spf_cov = cell.coverage;
    }
  }
  c.require(fg_width >= 0.0 && spf_width >= 0.0, "missing cells at N=100");
  c.require(fg_width < spf_width, "floodgate mean width " + fmt(fg_width) +
                                      " !< SPF mean width " + fmt(spf_width));
  c.require(fg_cov >= 0.93, "floodgate coverage " + fmt(fg_cov) + " < 0.93 at N=100");
  c.require(spf_cov >= 0.93, "SPF coverage " + fmt(spf_cov) + " < 0.93 at N=100");
  c.note("at N=100 (top input): width fg=" + fmt(fg_width, 3) + " spf=" + fmt(spf_width, 3) +
         ", coverage fg=" + fmt(fg_cov, 3) + " spf=" + fmt(spf_cov, 3));

  // Ledger audit on the d = 5 budget pattern of the worked example.
  for (const auto& e : report.ledger)
    c.require(e.actual_total == e.planned_per_trial * e.trials,
              "ledger mismatch for " + to_string(e.method));
  return c;
}

// ---------------------------------------------------------------------------
// 10. Batch-means path on Latin hypercube batches.
// ---------------------------------------------------------------------------
Check criterion_10() {
  Check c;
  const IshigamiSetup& setup = ishigami_setup();
  const std::vector<double>& truth = *setup.model.known_total_indices();
  const std::size_t trials = 500;
  const std::size_t batch_size = 32, num_batches = 200;

  std::vector<std::array<int, 3>> covered(trials);
  run_parallel_trials(trials, [&](std::size_t t) {
    const std::uint64_t ts = Rng::derive_seed(8005, "lhs", {t});
    const SampleMatrix lhs = sample_lhs_batches(setup.space, batch_size, num_batches, ts);
    EvaluatedDataset data = evaluate_on(setup.model, lhs, "lhs-data");
    const auto results = apply_to_existing_dataset(data, *setup.surrogate, setup.space, 0.05,
                                                   1, Rng::derive_seed(ts, "resample"));
    for (std::size_t j = 0; j < 3; ++j) covered[t][j] = results[j].covers(truth[j]) ? 1 : 0;
  });
  std::string covs = "coverage:";
  for (std::size_t j = 0; j < 3; ++j) {
    double rate = 0.0;
    for (std::size_t t = 0; t < trials; ++t) rate += covered[t][j];
    rate /= trials;
    covs += " " + fmt(rate, 3);
    c.require(rate >= 0.93, "input " + std::to_string(j) + " coverage " + fmt(rate));
  }
  c.note(covs + " over " + std::to_string(trials) + " trials (batch-means, 32 x 200)");
  return c;
}

// ---------------------------------------------------------------------------
// 11. CLI determinism: rerun from the manifest's config, byte-identical
//     result files.
// ---------------------------------------------------------------------------
int run_cli(const std::vector<std::string>& argv_strings) {
  std::vector<char*> argv;
  argv.reserve(argv_strings.size());
  for (const auto& s : argv_strings) argv.push_back(const_cast<char*>(s.c_str()));
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Check criterion_11() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "floodgate-acceptance-cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const fs::path cfg_path = dir / "cfg.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"model": {"name": "ishigami"},
               "surrogate": {"type": "krr", "train_size": 300, "gamma": 0.2},
               "methods": ["floodgate", "spf", "spf-surrogate", "panin"],
               "budgets": [60, 120], "trials": 5, "alpha": 0.05, "K": 1, "seed": 77})";
  }

  const auto out1 = (dir / "run1").string();
  const auto out2 = (dir / "run2").string();
  int rc = run_cli({"floodgate", "coverage", "--config", cfg_path.string(), "--out", out1});
  c.require(rc == 0, "first coverage run failed rc=" + std::to_string(rc));

  // Rerun from the manifest's embedded config (the manifest is sufficient to
  // reproduce the run exactly).
  const fs::path manifest = fs::path(out1) / "manifest.json";
  c.require(fs::exists(manifest), "manifest missing");
  nlohmann::json mj;
  {
    std::ifstream in(manifest);
    in >> mj;
  }
  const fs::path cfg2_path = dir / "cfg_from_manifest.json";
  {
    std::ofstream cfg2(cfg2_path);
    cfg2 << mj.at("config").dump();
  }
  rc = run_cli({"floodgate", "coverage", "--config", cfg2_path.string(), "--out", out2});
  c.require(rc == 0, "second coverage run failed rc=" + std::to_string(rc));
  c.require(!slurp(fs::path(out1) / "coverage.csv").empty(), "empty coverage.csv");
  c.require(slurp(fs::path(out1) / "coverage.csv") == slurp(fs::path(out2) / "coverage.csv"),
            "coverage.csv differs across reruns");
  c.require(slurp(fs::path(out1) / "coverage.json") == slurp(fs::path(out2) / "coverage.json"),
            "coverage.json differs across reruns");

  // Interval results through the floodgate subcommand as well.
  const auto fg1 = (dir / "fg1").string();
  const auto fg2 = (dir / "fg2").string();
  rc = run_cli({"floodgate", "floodgate", "--config", cfg_path.string(), "--budget", "200",
                "--seed", "5", "--out", fg1});
  c.require(rc == 0, "floodgate run 1 failed");
  rc = run_cli({"floodgate", "floodgate", "--config", cfg_path.string(), "--budget", "200",
                "--seed", "5", "--out", fg2});
  c.require(rc == 0, "floodgate run 2 failed");
  c.require(slurp(fs::path(fg1) / "intervals.csv") == slurp(fs::path(fg2) / "intervals.csv"),
            "intervals.csv differs across reruns");
  c.require(slurp(fs::path(fg1) / "intervals.json") == slurp(fs::path(fg2) / "intervals.json"),
            "intervals.json differs across reruns");
  return c;
}

// ---------------------------------------------------------------------------
// 12. Budget ledger: counted f* evaluations equal the plan exactly.
// ---------------------------------------------------------------------------
Check criterion_12() {
  Check c;
  const InputSpace space = InputSpace::uniform_cube(5);
  const ModelFunction model = additive_linear({1.0, 2.0, 0.5, -1.0, 0.25});
  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate, Method::Spf, Method::SpfSurrogate, Method::Panin};
  cfg.budgets = {100, 600};
  cfg.trials = 8;
  cfg.seed = 12001;
  cfg.surrogate.kind = SurrogateSpec::Kind::KrrTrain;
  cfg.surrogate.train_size = 200;
  const CoverageReport report = run_coverage_experiment(resolve_experiment(model, space, cfg));

  for (const auto& e : report.ledger) {
    const BudgetPlan plan = BudgetPlan::make(e.N, 5);
    std::size_t expected = 0;
    switch (e.method) {
      case Method::Floodgate: expected = plan.N; break;
      case Method::Spf: expected = plan.spf_feasible() ? plan.n_spf * 6 : 0; break;
      case Method::SpfSurrogate: expected = 0; break;
      case Method::Panin: expected = plan.N; break;
    }
    c.require(e.planned_per_trial == expected,
              to_string(e.method) + " plan " + std::to_string(e.planned_per_trial) + " != " +
                  std::to_string(expected));
    c.require(e.actual_total == e.planned_per_trial * e.trials,
              to_string(e.method) + " N=" + std::to_string(e.N) + " counted " +
                  std::to_string(e.actual_total) + " != planned " +
                  std::to_string(e.planned_per_trial * e.trials));
  }
  c.note("floodgate: N per trial; spf: n(d+1) = 6n per trial; spf-surrogate: 0");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* summary;
    std::function<Check()> fn;
  };
  const std::vector<Entry> criteria{
      {1, "Jansen equivalence (f = f*, K = 1, shared resamples)", criterion_1},
      {2, "hand-arithmetic oracle (n = 3 worked example)", criterion_2},
      {3, "Lemma-2 unbiasedness of M^z (1e4 replications)", criterion_3},
      {4, "Theorem-1 coverage on Ishigami + KRR", criterion_4},
      {5, "Theorem-2 excess-width rate (log-log slope)", criterion_5},
      {6, "dominance over the surrogate-error-bound interval", criterion_6},
      {7, "degenerate branch returns exactly [0, 1]", criterion_7},
      {8, "biased surrogate: SPF non-coverage vs floodgate validity", criterion_8},
      {9, "Hymod budget pattern (width and coverage at smallest N)", criterion_9},
      {10, "batch-means path on LHS batches (32 x 200)", criterion_10},
      {11, "CLI determinism from the run manifest", criterion_11},
      {12, "budget ledger matches the plan exactly", criterion_12},
  };

  std::optional<int> only;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

  int failures = 0;
  for (const auto& entry : criteria) {
    if (only && *only != entry.id) continue;
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = entry.fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", result.ok ? "PASS" : "FAIL", entry.id,
                entry.summary, secs, result.detail.empty() ? "" : " -- ",
                result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
