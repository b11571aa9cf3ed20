#include <doctest.h>

#include <cmath>

#include "floodgate/errors.hpp"
#include "floodgate/harness.hpp"
#include "floodgate/models.hpp"
#include "floodgate/surrogate.hpp"

using namespace floodgate;

TEST_CASE("budget plan splits the evaluation budget per method") {
  const BudgetPlan plan = BudgetPlan::make(100, 5);
  CHECK(plan.n_floodgate == 100);
  CHECK(plan.n_spf == 16);  // floor(100 / 6)
  CHECK(plan.n_spf_surrogate == 100);
  CHECK(plan.n_panin == 100);
  CHECK(plan.fstar_cost(Method::Floodgate) == 100);
  CHECK(plan.fstar_cost(Method::Spf) == 96);
  CHECK(plan.fstar_cost(Method::SpfSurrogate) == 0);
  CHECK(plan.fstar_cost(Method::Panin) == 100);
  CHECK(plan.spf_feasible());
  CHECK(!BudgetPlan::make(10, 5).spf_feasible());
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.budgets = {100, 50};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);
  cfg.budgets = {50, 100};
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);
  cfg.trials = 1;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("ground truth matches the closed form on additive models") {
  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({1.0, 2.0});
  const GroundTruth truth = ground_truth(model, space, 1000000, 99);
  REQUIRE(truth.values.size() == 2);
  CHECK(truth.values[0] == doctest::Approx(0.2).epsilon(0.01));
  CHECK(truth.values[1] == doctest::Approx(0.8).epsilon(0.01));
  CHECK(std::abs(truth.values[0] - 0.2) < 3.0 * truth.stderrs[0] + 1e-4);
  CHECK(truth.closed_form == std::vector<double>{0.2, 0.8});
  CHECK(truth.stderrs[0] < 0.002);  // +/- 0.002 at n_large = 1e6
  CHECK_THROWS_AS(ground_truth(model, space, 1000, 1), InvalidArgumentError);
}

TEST_CASE("ground truth of a constant model is all zeros") {
  const InputSpace space = InputSpace::uniform_cube(3);
  const GroundTruth truth = ground_truth(constant_model(3, 2.0), space, 100000, 5);
  for (double v : truth.values) CHECK(v == 0.0);
}

TEST_CASE("coverage experiment: ledger, determinism, cells") {
  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({1.0, 2.0});
  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate, Method::Spf, Method::SpfSurrogate, Method::Panin};
  cfg.budgets = {60, 120};
  cfg.trials = 4;
  cfg.alpha = 0.05;
  cfg.seed = 7;
  cfg.surrogate.kind = SurrogateSpec::Kind::Exact;

  const ResolvedExperiment exp = resolve_experiment(model, space, cfg);
  CHECK(exp.truth.source == "closed-form");
  const CoverageReport report = run_coverage_experiment(exp);

  CHECK(report.cells.size() == 4 * 2 * 2);  // methods x budgets x inputs
  for (const auto& e : report.ledger) {
    CHECK(e.actual_total == e.planned_per_trial * e.trials);
    if (e.method == Method::Floodgate) CHECK(e.planned_per_trial == e.N);
    if (e.method == Method::SpfSurrogate) CHECK(e.planned_per_trial == 0);
  }
  for (const auto& c : report.cells) {
    if (c.skipped) continue;
    CHECK(c.mean_lower >= 0.0);
    CHECK(c.mean_upper <= 1.0);
    CHECK(c.coverage >= 0.0);
    CHECK(c.coverage <= 1.0);
    CHECK(c.trials_run == 4);
  }

  // Bit-level determinism across runs and worker counts.
  ExperimentConfig cfg1 = cfg;
  cfg1.workers = 1;
  const CoverageReport again = run_coverage_experiment(resolve_experiment(model, space, cfg1));
  REQUIRE(again.cells.size() == report.cells.size());
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    CHECK(report.cells[i].mean_lower == again.cells[i].mean_lower);
    CHECK(report.cells[i].mean_upper == again.cells[i].mean_upper);
    CHECK(report.cells[i].coverage == again.cells[i].coverage);
  }
}

TEST_CASE("infeasible SPF budgets are marked skipped") {
  const InputSpace space = InputSpace::uniform_cube(4);
  const ModelFunction model = additive_linear({1.0, 1.0, 1.0, 1.0});
  ExperimentConfig cfg;
  cfg.methods = {Method::Spf};
  cfg.budgets = {8};  // floor(8/5) = 1 < 2
  cfg.trials = 2;
  cfg.seed = 3;
  cfg.surrogate.kind = SurrogateSpec::Kind::Exact;
  const CoverageReport report = run_coverage_experiment(resolve_experiment(model, space, cfg));
  for (const auto& c : report.cells) CHECK(c.skipped);
}

TEST_CASE("single-trial reports run but carry no variance estimates") {
  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({1.0, 2.0});
  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate};
  cfg.budgets = {50};
  cfg.trials = 1;
  cfg.seed = 11;
  cfg.surrogate.kind = SurrogateSpec::Kind::Exact;
  const CoverageReport report = run_coverage_experiment(resolve_experiment(model, space, cfg));
  for (const auto& c : report.cells) {
    CHECK(c.trials_run == 1);
    CHECK(std::isnan(c.se_lower));
    CHECK(std::isnan(c.coverage_se));
  }
}

TEST_CASE("shared-inputs mode reuses the dataset and only pays for picks") {
  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({1.0, 2.0});
  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate, Method::Spf};
  cfg.budgets = {60};
  cfg.trials = 3;
  cfg.seed = 13;
  cfg.fresh_inputs_per_trial = false;
  cfg.surrogate.kind = SurrogateSpec::Kind::Exact;
  const CoverageReport report = run_coverage_experiment(resolve_experiment(model, space, cfg));
  for (const auto& e : report.ledger) {
    if (e.method == Method::Floodgate) {
      CHECK(e.one_time_evals == 60);
      CHECK(e.planned_per_trial == 0);
      CHECK(e.actual_total == 0);
    }
    if (e.method == Method::Spf) {
      CHECK(e.one_time_evals == 20);         // n = floor(60/3) base rows
      CHECK(e.planned_per_trial == 20 * 2);  // fresh picks each trial
      CHECK(e.actual_total == 3 * 20 * 2);
    }
  }
}

TEST_CASE("width curve fits a ~ -1/2 slope for floodgate on an analytic model") {
  const InputSpace space = InputSpace::uniform_cube(2);
  const ModelFunction model = additive_linear({1.0, 2.0});
  ExperimentConfig cfg;
  cfg.methods = {Method::Floodgate};
  cfg.budgets = {100, 400, 1600, 6400};
  cfg.trials = 40;
  cfg.seed = 21;
  // Slightly wrong surrogate so the excess width has something to shrink.
  cfg.surrogate.kind = SurrogateSpec::Kind::KrrTrain;
  cfg.surrogate.train_size = 200;
  const WidthCurve curve = run_width_curve(resolve_experiment(model, space, cfg));
  REQUIRE(!curve.excess_width_slopes.empty());
  for (const auto& s : curve.excess_width_slopes) {
    CHECK(s.slope < -0.3);
    CHECK(s.slope > -0.7);
  }
}

TEST_CASE("apply_to_existing_dataset: batches honored, zero f* cost, errors") {
  const InputSpace space = ishigami_space();
  const ModelFunction model = ishigami(7.0, 0.1);
  auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
  const ModelFunction counted = with_eval_counter(model, counter);

  const SampleMatrix lhs = sample_lhs_batches(space, 16, 40, 31);
  EvaluatedDataset data = evaluate_on(counted, lhs, "lhs-data");
  const std::uint64_t evals_after_build = counter->load();

  const FunctionSurrogate exact(model);
  const auto results = apply_to_existing_dataset(data, exact, space, 0.05, 1, 77);
  CHECK(counter->load() == evals_after_build);  // zero new f* evaluations
  REQUIRE(results.size() == 3);
  for (const auto& r : results) {
    CHECK(r.diagnostics.n_effective == 40);  // batch-means path, n = #batches
    CHECK(r.diagnostics.notes == "batch-means");
  }

  // i.i.d. dataset without batches takes the standard path.
  EvaluatedDataset iid = make_dataset(model, space, 64, 5, "iid-data");
  const auto iid_results = apply_to_existing_dataset(iid, exact, space, 0.05, 1, 78);
  CHECK(iid_results[0].diagnostics.n_effective == 64);

  // Missing outputs is a format error; a single row is invalid-argument.
  EvaluatedDataset no_outputs = iid;
  no_outputs.outputs.clear();
  CHECK_THROWS_AS(apply_to_existing_dataset(no_outputs, exact, space, 0.05, 1, 1), FormatError);
  EvaluatedDataset one_row;
  one_row.inputs = iid.inputs.topRows(1);
  one_row.outputs = {iid.outputs[0]};
  CHECK_THROWS_AS(apply_to_existing_dataset(one_row, exact, space, 0.05, 1, 1),
                  InvalidArgumentError);
}

TEST_CASE("tier fitting lands near the requested relative MSE") {
  const InputSpace space = ishigami_space();
  const ModelFunction model = ishigami(7.0, 0.1);
  const TierFitResult tier = fit_krr_to_tier(model, space, 0.05, 1024, 17);
  CHECK(tier.achieved.e2 > 0.05 / 2.5);
  CHECK(tier.achieved.e2 < 0.05 * 2.5);
  CHECK(tier.fstar_evals >= 4000 + 64);
}
