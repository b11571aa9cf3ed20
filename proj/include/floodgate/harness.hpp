#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "floodgate/dataset.hpp"
#include "floodgate/estimators.hpp"
#include "floodgate/input_space.hpp"
#include "floodgate/models.hpp"
#include "floodgate/surrogate.hpp"

namespace floodgate {

/// Per-method sample sizes for a total f* budget of N evaluations across all
/// d inputs: floodgate and the bound-based method spend the whole budget on
/// one shared set of rows; pick-freeze splits it into n = floor(N/(d+1))
/// pairs; the surrogate-only estimator costs no f* evaluations and is run
/// with n = N pairs.
struct BudgetPlan {
  std::size_t N = 0;
  std::size_t d = 0;
  std::size_t n_floodgate = 0;
  std::size_t n_spf = 0;
  std::size_t n_spf_surrogate = 0;
  std::size_t n_panin = 0;

  static BudgetPlan make(std::size_t N, std::size_t d);
  bool spf_feasible() const { return n_spf >= 2; }
  /// Planned f* evaluations charged to a method for one trial.
  std::size_t fstar_cost(Method m) const;
};

struct SurrogateSpec {
  enum class Kind {
    KrrTrain,  // fit KRR on train_size fresh points
    KrrTier,   // search (size, gamma) for a target relative MSE
    KrrFile,   // load a serialized model
    Exact,     // f = f* (reference/debug)
  };
  Kind kind = Kind::KrrTrain;
  std::size_t train_size = 1000;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::size_t max_centers = 4000;
  double target_e2 = 0.01;            // KrrTier
  std::size_t tier_max_size = 4096;   // KrrTier search cap
  std::string path;                   // KrrFile
};

struct GroundTruthSpec {
  enum class Mode {
    Auto,        // closed form when the model has one, else Jansen
    ClosedForm,  // require the model's closed form
    Jansen,      // always estimate
    File,        // load per-input values from a CSV
  };
  Mode mode = Mode::Auto;
  std::size_t n_large = 1000000;
  std::optional<std::uint64_t> seed;  // defaults to a substream of the master seed
  std::string path;
};

struct ExperimentConfig {
  std::vector<Method> methods{Method::Floodgate, Method::Spf, Method::SpfSurrogate,
                              Method::Panin};
  std::vector<std::size_t> budgets{100};
  std::size_t trials = 100;
  double alpha = 0.05;
  std::size_t K = 1;
  std::uint64_t seed = 0;
  /// true: every trial draws fresh inputs; false: trials share the base
  /// inputs per budget and only the resample streams vary.
  bool fresh_inputs_per_trial = true;
  std::size_t workers = 0;  // 0 = hardware concurrency
  SurrogateSpec surrogate;
  GroundTruthSpec ground_truth;

  void validate() const;
};

struct GroundTruth {
  std::vector<double> values;       // per-input totals used for coverage
  std::vector<double> stderrs;      // 0 when values come from a closed form
  std::vector<double> closed_form;  // empty when the model has none
  std::size_t n_large = 0;
  std::uint64_t seed = 0;
  std::string source;  // "closed-form" | "jansen" | "file"
};

/// Pick-freeze ground-truth estimate at scale: Jansen per input at n_large
/// rows (streamed in equal chunks, whose means also give the standard
/// errors), with the model's closed form attached when known. The planned
/// n_large*(d+1) evaluation count is logged to stderr before running.
GroundTruth ground_truth(const ModelFunction& model, const InputSpace& space,
                         std::size_t n_large, std::uint64_t seed);

struct LedgerEntry {
  Method method;
  std::size_t N = 0;
  std::size_t planned_per_trial = 0;
  std::uint64_t one_time_evals = 0;  // shared-inputs mode dataset cost
  std::uint64_t actual_total = 0;    // per-trial costs summed over trials
  std::size_t trials = 0;
};

struct CoverageCell {
  Method method;
  std::size_t input = 0;
  std::size_t N = 0;       // f* budget
  std::size_t n_used = 0;  // per-method sample size under that budget
  std::size_t trials_run = 0;
  bool skipped = false;  // infeasible budget for this method
  double mean_lower = 0.0, se_lower = 0.0;
  double mean_upper = 0.0, se_upper = 0.0;
  double mean_width = 0.0, se_width = 0.0;
  double mean_excess_width = 0.0;  // floodgate: width - m_bar/v_bar; others: width
  double coverage = 0.0, coverage_se = 0.0;
};

struct CoverageReport {
  GroundTruth truth;
  RelativeMse surrogate_quality;  // verified before trials, never assumed
  double alpha = 0.05;
  std::vector<CoverageCell> cells;
  std::vector<LedgerEntry> ledger;
  std::uint64_t training_fstar_evals = 0;  // surrogate fitting + tier search
};

struct WidthCurve {
  CoverageReport report;
  struct Slope {
    Method method;
    std::size_t input = 0;
    double slope = 0.0;     // OLS slope of log mean excess width vs log n
    std::size_t points = 0;
  };
  std::vector<Slope> excess_width_slopes;
};

/// A fully resolved experiment: model, space, trained surrogate with its
/// verified quality, and ground truth.
struct ResolvedExperiment {
  ModelFunction model;
  InputSpace space;
  std::shared_ptr<const Surrogate> surrogate;
  RelativeMse surrogate_quality;
  GroundTruth truth;
  ExperimentConfig config;
  std::uint64_t training_fstar_evals = 0;
};

/// Trains/loads the surrogate per spec (training streams disjoint from trial
/// streams by label), verifies its relative MSE, and resolves ground truth.
ResolvedExperiment resolve_experiment(const ModelFunction& model, const InputSpace& space,
                                      const ExperimentConfig& config);

/// Repeated-trial study: for each trial and budget, builds datasets per the
/// budget plan, runs each method on every input, audits the f* evaluation
/// ledger against the plan, and tallies coverage against ground truth.
/// Deterministic for a fixed config (independent of worker count); trials
/// run in parallel with per-trial substreams.
CoverageReport run_coverage_experiment(const ResolvedExperiment& experiment);

/// Same machinery, plus fitted log-log slopes of mean excess width vs n.
WidthCurve run_width_curve(const ResolvedExperiment& experiment);

/// Floodgate on a pre-existing dataset with zero f* evaluations; the
/// batch-means path engages automatically when the dataset carries batch
/// labels. The dataset must have outputs (missing outputs is a format error).
std::vector<IntervalResult> apply_to_existing_dataset(const EvaluatedDataset& data,
                                                      const Surrogate& surrogate,
                                                      const InputSpace& space, double alpha,
                                                      std::size_t K, std::uint64_t seed);

/// Searches (training size, gamma) for a KRR surrogate whose verified
/// relative MSE is close to target_e2; returns the surrogate, its quality,
/// and the f* evaluations spent. Deterministic in (model, space, spec, seed).
struct TierFitResult {
  KrrSurrogate surrogate;
  RelativeMse achieved;
  std::uint64_t fstar_evals = 0;
  std::size_t train_size = 0;
  double gamma = 0.0;
};
TierFitResult fit_krr_to_tier(const ModelFunction& model, const InputSpace& space,
                              double target_e2, std::size_t max_size, std::uint64_t seed);

}  // namespace floodgate
