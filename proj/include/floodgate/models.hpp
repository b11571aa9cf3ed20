#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodgate/input_space.hpp"

namespace floodgate {

/// Deterministic scalar computational model over a fixed-dimension input.
/// When the total-order sensitivity indices are known in closed form they
/// ride along for use as ground truth.
class ModelFunction {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  ModelFunction(std::string name, std::size_t dimension, Fn fn,
                std::optional<std::vector<double>> total_indices = std::nullopt);

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return dimension_; }
  double operator()(std::span<const double> x) const;
  Vector evaluate_block(const Matrix& points) const;

  const std::optional<std::vector<double>>& known_total_indices() const {
    return total_indices_;
  }

 private:
  std::string name_;
  std::size_t dimension_;
  Fn fn_;
  std::optional<std::vector<double>> total_indices_;
};

/// Wraps a model so every evaluation bumps `counter`; the budget ledger
/// audits these counts against the experiment plan.
ModelFunction with_eval_counter(const ModelFunction& model,
                                std::shared_ptr<std::atomic<std::uint64_t>> counter);

// ---------------------------------------------------------------------------
// Hymod rainfall-runoff model
// ---------------------------------------------------------------------------

/// The five uncertain Hymod inputs, ranges as in hymod_space().
struct HymodParams {
  double sm;    // maximum soil moisture [mm], [0, 400]
  double beta;  // soil moisture routine exponent [-], [0, 2]
  double alfa;  // quick/slow partition coefficient [-], [0, 1]
  double rs;    // slow reservoir coefficient [1/day], [0, 0.1]
  double rf;    // fast reservoir coefficient [1/day], [0.1, 1]

  void validate() const;
};

/// Daily forcing: precipitation and potential evapotranspiration, with
/// optional observed streamflow. All values nonnegative, equal lengths.
struct ForcingSeries {
  std::vector<double> precipitation_mm;
  std::vector<double> pet_mm;
  std::optional<std::vector<double>> observed_flow_mm;

  std::size_t length() const { return precipitation_mm.size(); }
  void validate() const;
};

struct HymodRun {
  std::vector<double> streamflow;  // daily, mm/day
  std::vector<double> actual_et;   // daily, mm/day
  double final_storage;            // soil + routing reservoirs, mm
};

/// Daily explicit-step Hymod following the standard formulation:
/// a probability-distributed soil store with capacity sm and Pareto shape
/// beta (saturated fraction 1 - (1 - s/sm)^beta) produces effective rainfall,
/// split by alfa into a cascade of three linear quick reservoirs (rate rf)
/// and one linear slow reservoir (rate rs). ET is taken after rainfall
/// partitioning and limited by available storage. All states start at 0 and
/// stay nonnegative. Water balance closes exactly up to roundoff:
///   sum(precip) = sum(actual ET) + final_storage + sum(streamflow).
HymodRun hymod_run(const HymodParams& params, const ForcingSeries& forcing);
std::vector<double> hymod_simulate(const HymodParams& params, const ForcingSeries& forcing);

/// Nash-Sutcliffe efficiency: 1 - sum((sim-obs)^2) / sum((obs-mean(obs))^2).
/// Equals 1 iff sim == obs pointwise; throws on constant observations.
double nse(std::span<const double> simulated, std::span<const double> observed);

/// Input space of the five Hymod parameters (order sm, beta, alfa, rs, rf).
InputSpace hymod_space();

/// Deterministic 5-input model mapping Hymod parameters to the NSE of the
/// simulated streamflow against forcing.observed_flow_mm.
ModelFunction hymod_nse_response(const ForcingSeries& forcing);

/// Synthetic daily forcing: sinusoidal-seasonal PET, seeded intermittent
/// rainfall with gamma-distributed event magnitudes, and observed flow
/// generated by Hymod at true_params plus zero-truncated Gaussian noise of
/// standard deviation noise_sd. T >= 30.
ForcingSeries synthetic_forcing(std::size_t T, std::uint64_t seed,
                                const HymodParams& true_params, double noise_sd);

// ---------------------------------------------------------------------------
// Analytic benchmark models
// ---------------------------------------------------------------------------

/// f(x) = sin x1 + a sin^2 x2 + b x3^4 sin x1 over uniform(-pi, pi)^3,
/// with closed-form total indices attached.
ModelFunction ishigami(double a, double b);
InputSpace ishigami_space();

/// f(x) = sum_i coeffs[i] * x_i over uniform(0,1)^d; total index of input j
/// is coeffs[j]^2 / sum_i coeffs[i]^2 (all zero when every coefficient is 0).
ModelFunction additive_linear(std::vector<double> coeffs);

/// Seeded sparse additive-plus-interaction model over uniform(0,1)^d, d >= 10:
///   f(x) = sum_{i in A} a_i x_i + sum_{(p,q) in P} c_pq (x_p - 1/2)(x_q - 1/2)
/// with |A| ~ d/10 active linear terms and |P| ~ d/20 centered pairwise
/// interactions among them. The centered products are orthogonal to the
/// linear terms and to each other, so every total index is closed-form:
///   S_j = (a_j^2/12 + sum_{(p,q) ∋ j} c_pq^2/144) / Var(f).
/// Evaluation is O(d) per point. Coordinates outside A and P have index 0.
ModelFunction synthetic_highdim(std::size_t d, std::uint64_t seed);

/// Constant model; every total index is 0 by the 0/0 convention.
ModelFunction constant_model(std::size_t d, double value);

}  // namespace floodgate
