#include "floodgate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "floodgate/errors.hpp"
#include "floodgate/io.hpp"
#include "floodgate/rng.hpp"
#include "floodgate/stats.hpp"

namespace floodgate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t w = workers == 0 ? std::thread::hardware_concurrency() : workers;
  w = std::max<std::size_t>(1, std::min(w, count));
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

BudgetPlan BudgetPlan::make(std::size_t N, std::size_t d) {
  if (N == 0 || d == 0) throw InvalidArgumentError("BudgetPlan: N and d must be >= 1");
  BudgetPlan plan;
  plan.N = N;
  plan.d = d;
  plan.n_floodgate = N;
  plan.n_spf = N / (d + 1);
  plan.n_spf_surrogate = N;
  plan.n_panin = N;
  return plan;
}

std::size_t BudgetPlan::fstar_cost(Method m) const {
  switch (m) {
    case Method::Floodgate: return n_floodgate;
    case Method::Spf: return n_spf * (d + 1);
    case Method::SpfSurrogate: return 0;
    case Method::Panin: return n_panin;
  }
  return 0;
}

void ExperimentConfig::validate() const {
  if (trials == 0) throw InvalidArgumentError("config: trials must be >= 1");
  if (budgets.empty()) throw InvalidArgumentError("config: budgets must be nonempty");
  if (!std::is_sorted(budgets.begin(), budgets.end()))
    throw InvalidArgumentError("config: budgets must be ascending");
  if (budgets.front() == 0) throw InvalidArgumentError("config: budgets must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgumentError("config: alpha must be in (0,1)");
  if (K == 0) throw InvalidArgumentError("config: K must be >= 1");
  if (methods.empty()) throw InvalidArgumentError("config: methods must be nonempty");
}

GroundTruth ground_truth(const ModelFunction& model, const InputSpace& space,
                         std::size_t n_large, std::uint64_t seed) {
  if (n_large < 100000) throw InvalidArgumentError("ground_truth: n_large must be >= 1e5");
  if (model.dimension() != space.dimension())
    throw InvalidArgumentError("ground_truth: dimension mismatch");
  const std::size_t d = model.dimension();

  // Budget overflow guard: announce the evaluation bill before running.
  std::cerr << "[ground-truth] model=" << model.name() << " planned f* evaluations: "
            << n_large * (d + 1) << " (n_large=" << n_large << ", d=" << d << ")\n";

  const std::size_t num_chunks = 128;
  const std::size_t chunk = std::max<std::size_t>(1, n_large / num_chunks);
  const std::size_t n_used = chunk * num_chunks;

  // Per-chunk means; chunks are i.i.d., so they both average to the Jansen
  // estimate and provide its standard error.
  std::vector<std::vector<double>> a_chunks(d, std::vector<double>(num_chunks, 0.0));
  std::vector<double> y_chunks(num_chunks, 0.0);
  std::vector<double> y2_chunks(num_chunks, 0.0);

  parallel_for(num_chunks, 0, [&](std::size_t c) {
    const std::uint64_t stream = Rng::derive_seed(seed, "ground-truth", {c});
    SampleMatrix base = sample_iid(space, chunk, stream);
    const Vector y = model.evaluate_block(base.values);
    y_chunks[c] = y.mean();
    y2_chunks[c] = y.array().square().mean();
    Matrix modified = base.values;
    for (std::size_t j = 0; j < d; ++j) {
      const ResampleBlock block = resample_conditional(space, base, j, 1, stream);
      const auto jc = static_cast<Eigen::Index>(j);
      modified.col(jc) = block.values.col(0);
      const Vector yt = model.evaluate_block(modified);
      modified.col(jc) = base.values.col(jc);
      a_chunks[j][c] = 0.5 * (y - yt).array().square().mean();
    }
  });

  const double m1 = mean(y_chunks);
  const double m2 = mean(y2_chunks);
  const double nn = static_cast<double>(n_used);
  const double var = (m2 - m1 * m1) * nn / (nn - 1.0);

  GroundTruth out;
  out.n_large = n_used;
  out.seed = seed;
  out.source = "jansen";
  out.values.resize(d);
  out.stderrs.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double abar = mean(a_chunks[j]);
    if (var == 0.0) {
      out.values[j] = 0.0;  // 0/0 convention
      out.stderrs[j] = 0.0;
      continue;
    }
    out.values[j] = abar / var;
    // Delta method through g(a, m1, m2) = a / (c (m2 - m1^2)), c = n/(n-1),
    // using the chunk-mean covariance.
    const MeanCov3 mc = mean_cov3(a_chunks[j], y_chunks, y2_chunks);
    const double c = nn / (nn - 1.0);
    const double g1 = 1.0 / var;
    const double g2 = abar * c * 2.0 * m1 / (var * var);
    const double g3 = -abar * c / (var * var);
    double v = 0.0;
    const double grad[3] = {g1, g2, g3};
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q) v += grad[p] * mc.cov[p][q] * grad[q];
    out.stderrs[j] = v > 0.0 ? std::sqrt(v / static_cast<double>(num_chunks)) : 0.0;
  }
  if (model.known_total_indices()) out.closed_form = *model.known_total_indices();
  return out;
}

TierFitResult fit_krr_to_tier(const ModelFunction& model, const InputSpace& space,
                              double target_e2, std::size_t max_size, std::uint64_t seed) {
  if (!(target_e2 > 0.0)) throw InvalidArgumentError("fit_krr_to_tier: target must be > 0");
  const std::size_t verify_n = 4000;
  EvaluatedDataset verify = make_dataset(model, space, verify_n, seed, "surrogate-verify");
  std::uint64_t evals = verify_n;

  std::optional<TierFitResult> best;
  double best_dist = std::numeric_limits<double>::infinity();
  const auto consider = [&](KrrSurrogate&& s, std::size_t m, double gamma) {
    const RelativeMse rel = estimate_relative_mse(s, verify);
    if (rel.degenerate) return;
    const double e2 = std::max(rel.e2, 1e-12);
    const double dist = std::abs(std::log(e2 / target_e2));
    if (dist < best_dist) {
      best_dist = dist;
      best = TierFitResult{std::move(s), rel, 0, m, gamma};
    }
  };

  for (std::size_t m = 64; m <= max_size; m *= 2) {
    EvaluatedDataset train =
        make_dataset(model, space, m, seed, "surrogate-train-" + std::to_string(m));
    evals += m;
    KrrOptions opts;
    opts.seed = seed;
    KrrSurrogate with_median = fit_krr(train, space, opts);
    const double med = with_median.gamma();
    consider(std::move(with_median), m, med);
    for (const double scale : {0.5, 0.25, 0.125, 0.0625}) {
      KrrOptions o;
      o.seed = seed;
      o.gamma = med * scale;
      consider(fit_krr(train, space, o), m, med * scale);
    }
    // Stop at the smallest size that lands within a factor 1.5 of the target.
    if (best && best_dist <= std::log(1.5)) break;
  }
  if (!best)
    throw NumericalError("fit_krr_to_tier: no usable surrogate (degenerate verify data?)");
  best->fstar_evals = evals;
  return std::move(*best);
}

ResolvedExperiment resolve_experiment(const ModelFunction& model, const InputSpace& space,
                                      const ExperimentConfig& config) {
  config.validate();
  if (model.dimension() != space.dimension())
    throw InvalidArgumentError("resolve_experiment: dimension mismatch");

  ResolvedExperiment exp{model, space, nullptr, {}, {}, config, 0};

  const SurrogateSpec& spec = config.surrogate;
  switch (spec.kind) {
    case SurrogateSpec::Kind::KrrTrain: {
      EvaluatedDataset train =
          make_dataset(model, space, spec.train_size, config.seed, "surrogate-train");
      KrrOptions opts;
      opts.gamma = spec.gamma;
      opts.lambda = spec.lambda;
      opts.max_centers = spec.max_centers;
      opts.seed = config.seed;
      exp.surrogate = std::make_shared<KrrSurrogate>(fit_krr(train, space, opts));
      exp.training_fstar_evals = spec.train_size;
      EvaluatedDataset verify =
          make_dataset(model, space, 2000, config.seed, "surrogate-verify");
      exp.training_fstar_evals += 2000;
      assert_disjoint_provenance(train, verify);
      exp.surrogate_quality = estimate_relative_mse(*exp.surrogate, verify);
      break;
    }
    case SurrogateSpec::Kind::KrrTier: {
      TierFitResult tier =
          fit_krr_to_tier(model, space, spec.target_e2, spec.tier_max_size, config.seed);
      exp.surrogate_quality = tier.achieved;
      exp.training_fstar_evals = tier.fstar_evals;
      exp.surrogate = std::make_shared<KrrSurrogate>(std::move(tier.surrogate));
      break;
    }
    case SurrogateSpec::Kind::KrrFile: {
      exp.surrogate = std::make_shared<KrrSurrogate>(io::load_krr(spec.path));
      EvaluatedDataset verify =
          make_dataset(model, space, 2000, config.seed, "surrogate-verify");
      exp.training_fstar_evals = 2000;
      exp.surrogate_quality = estimate_relative_mse(*exp.surrogate, verify);
      break;
    }
    case SurrogateSpec::Kind::Exact: {
      exp.surrogate = std::make_shared<FunctionSurrogate>(model);
      exp.surrogate_quality = RelativeMse{0.0, 0.0, false};
      break;
    }
  }

  const GroundTruthSpec& gt = config.ground_truth;
  const std::uint64_t gt_seed = gt.seed.value_or(Rng::derive_seed(config.seed, "ground-truth"));
  switch (gt.mode) {
    case GroundTruthSpec::Mode::Auto:
      if (model.known_total_indices()) {
        exp.truth.values = *model.known_total_indices();
        exp.truth.closed_form = exp.truth.values;
        exp.truth.stderrs.assign(model.dimension(), 0.0);
        exp.truth.source = "closed-form";
      } else {
        exp.truth = ground_truth(model, space, gt.n_large, gt_seed);
      }
      break;
    case GroundTruthSpec::Mode::ClosedForm:
      if (!model.known_total_indices())
        throw InvalidArgumentError("resolve_experiment: model has no closed-form indices");
      exp.truth.values = *model.known_total_indices();
      exp.truth.closed_form = exp.truth.values;
      exp.truth.stderrs.assign(model.dimension(), 0.0);
      exp.truth.source = "closed-form";
      break;
    case GroundTruthSpec::Mode::Jansen:
      exp.truth = ground_truth(model, space, gt.n_large, gt_seed);
      break;
    case GroundTruthSpec::Mode::File:
      exp.truth = io::load_ground_truth(gt.path);
      if (exp.truth.values.size() != model.dimension())
        throw InvalidArgumentError("resolve_experiment: ground-truth file dimension mismatch");
      break;
  }
  return exp;
}

namespace {

struct CellSample {
  double lower = kNaN;
  double upper = kNaN;
  double width = kNaN;
  double excess = kNaN;
  bool covered = false;
  bool valid = false;
};

double se_of_mean(std::span<const double> xs) {
  if (xs.size() < 2) return kNaN;
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

}  // namespace

CoverageReport run_coverage_experiment(const ResolvedExperiment& experiment) {
  const ExperimentConfig& cfg = experiment.config;
  cfg.validate();
  const ModelFunction& model = experiment.model;
  const InputSpace& space = experiment.space;
  const Surrogate& surrogate = *experiment.surrogate;
  const std::size_t d = model.dimension();
  const std::size_t B = cfg.budgets.size();
  const std::size_t M = cfg.methods.size();
  const std::size_t T = cfg.trials;
  if (experiment.truth.values.size() != d)
    throw InvalidArgumentError("run_coverage_experiment: ground truth dimension mismatch");

  std::vector<BudgetPlan> plans;
  plans.reserve(B);
  for (const std::size_t N : cfg.budgets) plans.push_back(BudgetPlan::make(N, d));

  // Shared-inputs mode: one dataset per budget drawn up front; trials then
  // vary only the resample streams. The one-time f* cost goes to the ledger.
  const bool fresh = cfg.fresh_inputs_per_trial;
  std::vector<EvaluatedDataset> shared_data;
  std::vector<EvaluatedDataset> shared_spf_base;
  std::vector<std::uint64_t> shared_fg_cost(B, 0), shared_spf_cost(B, 0);
  if (!fresh) {
    auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
    const ModelFunction counted = with_eval_counter(model, counter);
    for (std::size_t bi = 0; bi < B; ++bi) {
      const std::uint64_t stream = Rng::derive_seed(cfg.seed, "shared-data", {bi});
      counter->store(0);
      shared_data.push_back(make_dataset(counted, space, plans[bi].N, stream, "fg-shared"));
      shared_fg_cost[bi] = counter->load();
      counter->store(0);
      if (plans[bi].spf_feasible()) {
        shared_spf_base.push_back(
            make_dataset(counted, space, plans[bi].n_spf, stream, "spf-shared"));
        shared_spf_cost[bi] = counter->load();
      } else {
        shared_spf_base.emplace_back();
      }
    }
  }

  const std::size_t cells_per_trial = M * B * d;
  std::vector<std::vector<CellSample>> samples(T);
  std::vector<std::vector<std::uint64_t>> fstar_counts(T);

  parallel_for(T, cfg.workers, [&](std::size_t t) {
    std::vector<CellSample> row(cells_per_trial);
    std::vector<std::uint64_t> counts(M * B, 0);
    const std::uint64_t trial_stream = Rng::derive_seed(cfg.seed, "trial", {t});

    for (std::size_t bi = 0; bi < B; ++bi) {
      const BudgetPlan& plan = plans[bi];
      const std::uint64_t bstream = Rng::derive_seed(trial_stream, "budget", {bi});

      for (std::size_t mi = 0; mi < M; ++mi) {
        const Method method = cfg.methods[mi];
        auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
        const ModelFunction counted = with_eval_counter(model, counter);
        std::vector<IntervalResult> intervals;
        bool skipped = false;

        switch (method) {
          case Method::Floodgate: {
            const EvaluatedDataset& data =
                fresh ? make_dataset(counted, space, plan.N, bstream, "fg-data")
                      : shared_data[bi];
            intervals =
                floodgate_all_inputs(data, surrogate, space, cfg.K,
                                     Rng::derive_seed(bstream, "fg-resample"), cfg.alpha);
            break;
          }
          case Method::Spf: {
            if (!plan.spf_feasible()) {
              skipped = true;
              break;
            }
            PairedDataset pairs;
            if (fresh) {
              pairs = build_paired_dataset(counted, space, plan.n_spf,
                                           Rng::derive_seed(bstream, "spf"));
            } else {
              const EvaluatedDataset& base = shared_spf_base[bi];
              const SampleMatrix base_samples{base.inputs, base.provenance.seed,
                                              base.batch_ids};
              pairs =
                  build_paired_dataset_from_base(counted, space, base_samples, base.outputs,
                                                 Rng::derive_seed(bstream, "spf"));
            }
            intervals.reserve(d);
            for (std::size_t j = 0; j < d; ++j)
              intervals.push_back(spf_jansen(pairs, j, cfg.alpha));
            break;
          }
          case Method::SpfSurrogate: {
            const PairedDataset pairs = build_paired_dataset(
                surrogate, space, plan.n_spf_surrogate, Rng::derive_seed(bstream, "spfsurr"));
            intervals.reserve(d);
            for (std::size_t j = 0; j < d; ++j)
              intervals.push_back(spf_surrogate(pairs, j, cfg.alpha));
            break;
          }
          case Method::Panin: {
            const EvaluatedDataset& data =
                fresh ? make_dataset(counted, space, plan.n_panin, bstream, "panin-data")
                      : shared_data[bi];
            const PairedDataset pairs = build_paired_dataset(
                surrogate, space, plan.n_panin, Rng::derive_seed(bstream, "panin-pairs"));
            intervals.reserve(d);
            for (std::size_t j = 0; j < d; ++j)
              intervals.push_back(panin_from_data(pairs, data, surrogate, j, cfg.alpha));
            break;
          }
        }

        // Budget ledger: per-trial counted f* evaluations must match the
        // plan exactly. In shared-inputs mode the dataset reusers cost
        // nothing per trial and pick-freeze pays only its n*d fresh picks.
        const std::uint64_t expected =
            fresh ? plan.fstar_cost(method)
                  : (method == Method::Spf && plan.spf_feasible() ? plan.n_spf * d : 0);
        const std::uint64_t actual = counter->load();
        if (!skipped && actual != expected)
          throw LedgerError("budget ledger mismatch: method=" + to_string(method) +
                            " N=" + std::to_string(plan.N) + " trial=" + std::to_string(t) +
                            " expected=" + std::to_string(expected) +
                            " actual=" + std::to_string(actual));
        counts[mi * B + bi] = actual;

        if (skipped) continue;
        for (std::size_t j = 0; j < d; ++j) {
          CellSample& cell = row[(mi * B + bi) * d + j];
          const IntervalResult& r = intervals[j];
          cell.lower = r.lower;
          cell.upper = r.upper;
          cell.width = r.width();
          if (method == Method::Floodgate && !r.diagnostics.degenerate)
            cell.excess = r.width() - r.diagnostics.m_bar / r.diagnostics.v_bar;
          else
            cell.excess = r.width();
          cell.covered = r.covers(experiment.truth.values[j]);
          cell.valid = true;
        }
      }
    }
    samples[t] = std::move(row);
    fstar_counts[t] = std::move(counts);
  });

  // Aggregation is trial-index ordered and pairwise-stable, so the report
  // does not depend on worker scheduling.
  CoverageReport report;
  report.truth = experiment.truth;
  report.surrogate_quality = experiment.surrogate_quality;
  report.alpha = cfg.alpha;
  report.training_fstar_evals = experiment.training_fstar_evals;

  for (std::size_t mi = 0; mi < M; ++mi) {
    const Method method = cfg.methods[mi];
    for (std::size_t bi = 0; bi < B; ++bi) {
      const BudgetPlan& plan = plans[bi];
      LedgerEntry ledger;
      ledger.method = method;
      ledger.N = plan.N;
      ledger.trials = T;
      if (fresh) {
        ledger.planned_per_trial =
            (method == Method::Spf && !plan.spf_feasible()) ? 0 : plan.fstar_cost(method);
      } else {
        ledger.planned_per_trial =
            (method == Method::Spf && plan.spf_feasible()) ? plan.n_spf * d : 0;
        if (method == Method::Floodgate) ledger.one_time_evals = shared_fg_cost[bi];
        if (method == Method::Spf) ledger.one_time_evals = shared_spf_cost[bi];
      }
      for (std::size_t t = 0; t < T; ++t) ledger.actual_total += fstar_counts[t][mi * B + bi];
      report.ledger.push_back(ledger);

      for (std::size_t j = 0; j < d; ++j) {
        CoverageCell cell;
        cell.method = method;
        cell.input = j;
        cell.N = plan.N;
        switch (method) {
          case Method::Floodgate: cell.n_used = plan.n_floodgate; break;
          case Method::Spf: cell.n_used = plan.n_spf; break;
          case Method::SpfSurrogate: cell.n_used = plan.n_spf_surrogate; break;
          case Method::Panin: cell.n_used = plan.n_panin; break;
        }
        std::vector<double> lows, ups, widths, excesses;
        std::size_t covered = 0;
        for (std::size_t t = 0; t < T; ++t) {
          const CellSample& s = samples[t][(mi * B + bi) * d + j];
          if (!s.valid) continue;
          lows.push_back(s.lower);
          ups.push_back(s.upper);
          widths.push_back(s.width);
          excesses.push_back(s.excess);
          if (s.covered) ++covered;
        }
        cell.trials_run = lows.size();
        cell.skipped = lows.empty();
        if (!cell.skipped) {
          cell.mean_lower = mean(lows);
          cell.mean_upper = mean(ups);
          cell.mean_width = mean(widths);
          cell.mean_excess_width = mean(excesses);
          cell.se_lower = se_of_mean(lows);
          cell.se_upper = se_of_mean(ups);
          cell.se_width = se_of_mean(widths);
          const double p = static_cast<double>(covered) / static_cast<double>(lows.size());
          cell.coverage = p;
          cell.coverage_se = lows.size() >= 2
                                 ? std::sqrt(p * (1.0 - p) / static_cast<double>(lows.size()))
                                 : kNaN;
        }
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

WidthCurve run_width_curve(const ResolvedExperiment& experiment) {
  WidthCurve curve;
  curve.report = run_coverage_experiment(experiment);
  const std::size_t d = experiment.model.dimension();

  for (const Method method : experiment.config.methods) {
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> log_n, log_excess;
      for (const CoverageCell& cell : curve.report.cells) {
        if (cell.method != method || cell.input != j || cell.skipped) continue;
        if (!(cell.mean_excess_width > 0.0)) continue;  // clipped to the boundary
        log_n.push_back(std::log(static_cast<double>(cell.n_used)));
        log_excess.push_back(std::log(cell.mean_excess_width));
      }
      if (log_n.size() < 2) continue;
      WidthCurve::Slope s;
      s.method = method;
      s.input = j;
      s.points = log_n.size();
      s.slope = ols_slope(log_n, log_excess);
      curve.excess_width_slopes.push_back(s);
    }
  }
  return curve;
}

std::vector<IntervalResult> apply_to_existing_dataset(const EvaluatedDataset& data,
                                                      const Surrogate& surrogate,
                                                      const InputSpace& space, double alpha,
                                                      std::size_t K, std::uint64_t seed) {
  data.validate();
  if (!data.has_outputs())
    throw FormatError("apply_to_existing_dataset: dataset has no outputs column");
  return floodgate_all_inputs(data, surrogate, space, K, seed, alpha);
}

}  // namespace floodgate
