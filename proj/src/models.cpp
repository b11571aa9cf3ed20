#include "floodgate/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "floodgate/errors.hpp"
#include "floodgate/stats.hpp"

namespace floodgate {

ModelFunction::ModelFunction(std::string name, std::size_t dimension, Fn fn,
                             std::optional<std::vector<double>> total_indices)
    : name_(std::move(name)),
      dimension_(dimension),
      fn_(std::move(fn)),
      total_indices_(std::move(total_indices)) {
  if (dimension_ == 0) throw InvalidArgumentError("ModelFunction: dimension must be >= 1");
  if (!fn_) throw InvalidArgumentError("ModelFunction: missing evaluator");
  if (total_indices_ && total_indices_->size() != dimension_)
    throw InvalidArgumentError("ModelFunction: total index count must equal dimension");
}

double ModelFunction::operator()(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw InvalidArgumentError("ModelFunction '" + name_ + "': expected " +
                               std::to_string(dimension_) + " inputs, got " +
                               std::to_string(x.size()));
  return fn_(x);
}

Vector ModelFunction::evaluate_block(const Matrix& points) const {
  if (static_cast<std::size_t>(points.cols()) != dimension_)
    throw InvalidArgumentError("ModelFunction '" + name_ + "': dimension mismatch in block");
  Vector out(points.rows());
  std::vector<double> row(dimension_);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < dimension_; ++j)
      row[j] = points(i, static_cast<Eigen::Index>(j));
    out(i) = fn_(row);
  }
  return out;
}

ModelFunction with_eval_counter(const ModelFunction& model,
                                std::shared_ptr<std::atomic<std::uint64_t>> counter) {
  if (!counter) throw InvalidArgumentError("with_eval_counter: null counter");
  return ModelFunction(
      model.name(), model.dimension(),
      [model, counter](std::span<const double> x) {
        counter->fetch_add(1, std::memory_order_relaxed);
        return model(x);
      },
      model.known_total_indices());
}

// ---------------------------------------------------------------------------
// Hymod
// ---------------------------------------------------------------------------

void HymodParams::validate() const {
  const auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(sm, 0.0, 400.0) || !in(beta, 0.0, 2.0) || !in(alfa, 0.0, 1.0) ||
      !in(rs, 0.0, 0.1) || !in(rf, 0.1, 1.0))
    throw InvalidArgumentError("HymodParams out of range: sm in [0,400], beta in [0,2], "
                               "alfa in [0,1], rs in [0,0.1], rf in [0.1,1]");
}

void ForcingSeries::validate() const {
  const std::size_t T = precipitation_mm.size();
  if (T == 0) throw InvalidArgumentError("ForcingSeries: empty forcing");
  if (pet_mm.size() != T)
    throw InvalidArgumentError("ForcingSeries: precip/pet length mismatch");
  if (observed_flow_mm && observed_flow_mm->size() != T)
    throw InvalidArgumentError("ForcingSeries: observed flow length mismatch");
  const auto nonneg = [](std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(),
                       [](double v) { return std::isfinite(v) && v >= 0.0; });
  };
  if (!nonneg(precipitation_mm) || !nonneg(pet_mm) ||
      (observed_flow_mm && !nonneg(*observed_flow_mm)))
    throw InvalidArgumentError("ForcingSeries: values must be finite and >= 0");
}

HymodRun hymod_run(const HymodParams& params, const ForcingSeries& forcing) {
  params.validate();
  forcing.validate();

  const std::size_t T = forcing.length();
  HymodRun run;
  run.streamflow.resize(T);
  run.actual_et.resize(T);

  double soil = 0.0;                      // soil store, [0, sm]
  double q1 = 0.0, q2 = 0.0, q3 = 0.0;    // quick cascade
  double slow = 0.0;                      // slow reservoir

  for (std::size_t t = 0; t < T; ++t) {
    const double precip = forcing.precipitation_mm[t];
    const double pet = forcing.pet_mm[t];

    // Saturated catchment fraction from the Pareto capacity distribution;
    // a zero-capacity store is fully saturated.
    double sat_frac = 1.0;
    if (params.sm > 0.0) {
      const double fill = std::clamp(soil / params.sm, 0.0, 1.0);
      sat_frac = 1.0 - std::pow(1.0 - fill, params.beta);
    }

    // Rain on the saturated fraction runs off directly; the rest infiltrates,
    // and anything beyond capacity overflows into effective rainfall too.
    double effective = sat_frac * precip;
    soil += precip - effective;
    if (soil > params.sm) {
      effective += soil - params.sm;
      soil = params.sm;
    }

    // ET after rainfall partitioning, limited by available storage.
    const double aet = std::min(pet, soil);
    soil -= aet;
    run.actual_et[t] = aet;

    // Routing: alfa to the quick cascade, the rest to the slow reservoir.
    q1 += params.alfa * effective;
    const double o1 = params.rf * q1;
    q1 -= o1;
    q2 += o1;
    const double o2 = params.rf * q2;
    q2 -= o2;
    q3 += o2;
    const double o3 = params.rf * q3;
    q3 -= o3;

    slow += (1.0 - params.alfa) * effective;
    const double os = params.rs * slow;
    slow -= os;

    soil = std::max(soil, 0.0);
    q1 = std::max(q1, 0.0);
    q2 = std::max(q2, 0.0);
    q3 = std::max(q3, 0.0);
    slow = std::max(slow, 0.0);

    run.streamflow[t] = o3 + os;
  }
  run.final_storage = soil + q1 + q2 + q3 + slow;
  return run;
}

std::vector<double> hymod_simulate(const HymodParams& params, const ForcingSeries& forcing) {
  return hymod_run(params, forcing).streamflow;
}

double nse(std::span<const double> simulated, std::span<const double> observed) {
  if (simulated.size() != observed.size() || observed.empty())
    throw InvalidArgumentError("nse: series must be nonempty and equal length");
  const double obs_mean = mean(observed);
  double ss_res = 0.0;
  double ss_obs = 0.0;
  for (std::size_t t = 0; t < observed.size(); ++t) {
    ss_res += (simulated[t] - observed[t]) * (simulated[t] - observed[t]);
    ss_obs += (observed[t] - obs_mean) * (observed[t] - obs_mean);
  }
  if (ss_obs == 0.0) throw DegenerateInputError("nse: observed series is constant");
  return 1.0 - ss_res / ss_obs;
}

InputSpace hymod_space() {
  return InputSpace({{"Sm", MarginalKind::Uniform, 0.0, 400.0},
                     {"beta", MarginalKind::Uniform, 0.0, 2.0},
                     {"alfa", MarginalKind::Uniform, 0.0, 1.0},
                     {"Rs", MarginalKind::Uniform, 0.0, 0.1},
                     {"Rf", MarginalKind::Uniform, 0.1, 1.0}});
}

ModelFunction hymod_nse_response(const ForcingSeries& forcing) {
  forcing.validate();
  if (!forcing.observed_flow_mm)
    throw InvalidArgumentError("hymod_nse_response: forcing lacks observed flow");
  auto shared = std::make_shared<const ForcingSeries>(forcing);
  return ModelFunction("hymod-nse", 5, [shared](std::span<const double> x) {
    const HymodParams p{x[0], x[1], x[2], x[3], x[4]};
    const auto sim = hymod_simulate(p, *shared);
    return nse(sim, *shared->observed_flow_mm);
  });
}

ForcingSeries synthetic_forcing(std::size_t T, std::uint64_t seed,
                                const HymodParams& true_params, double noise_sd) {
  if (T < 30) throw InvalidArgumentError("synthetic_forcing: T must be >= 30");
  if (noise_sd < 0.0) throw InvalidArgumentError("synthetic_forcing: noise_sd must be >= 0");
  true_params.validate();

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  ForcingSeries f;
  f.precipitation_mm.resize(T);
  f.pet_mm.resize(T);

  // Humid-catchment defaults: runoff is frequent enough that the NSE
  // response stays well conditioned over the whole parameter box.
  Rng rain_rng = Rng::substream(seed, "forcing-rain");
  for (std::size_t t = 0; t < T; ++t) {
    // Seasonal PET: mean 1.8 mm/day, 60% seasonal swing, strictly nonnegative.
    f.pet_mm[t] = 1.8 * (1.0 + 0.6 * std::sin(kTwoPi * (static_cast<double>(t) - 80.0) / 365.0));
    // Intermittent rainfall: 45% wet days, gamma event magnitudes.
    const bool wet = rain_rng.uniform() < 0.45;
    f.precipitation_mm[t] = wet ? rain_rng.gamma(1.6, 13.0) : 0.0;
  }

  std::vector<double> flow = hymod_simulate(true_params, f);
  Rng noise_rng = Rng::substream(seed, "forcing-noise");
  for (double& q : flow) {
    if (noise_sd > 0.0) q = std::max(0.0, q + noise_sd * noise_rng.normal());
  }
  f.observed_flow_mm = std::move(flow);
  return f;
}

// ---------------------------------------------------------------------------
// Analytic benchmark models
// ---------------------------------------------------------------------------

ModelFunction ishigami(double a, double b) {
  const double pi4 = std::pow(std::numbers::pi, 4);
  const double v1 = 0.5 * (1.0 + b * pi4 / 5.0) * (1.0 + b * pi4 / 5.0);
  const double v2 = a * a / 8.0;
  const double v13 = b * b * pi4 * pi4 * (1.0 / 18.0 - 1.0 / 50.0);
  const double var = v1 + v2 + v13;
  std::optional<std::vector<double>> totals;
  if (var > 0.0) totals = std::vector<double>{(v1 + v13) / var, v2 / var, v13 / var};
  return ModelFunction(
      "ishigami", 3,
      [a, b](std::span<const double> x) {
        const double s1 = std::sin(x[0]);
        const double s2 = std::sin(x[1]);
        return s1 + a * s2 * s2 + b * x[2] * x[2] * x[2] * x[2] * s1;
      },
      std::move(totals));
}

InputSpace ishigami_space() {
  return InputSpace::uniform_cube(3, -std::numbers::pi, std::numbers::pi);
}

ModelFunction additive_linear(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InvalidArgumentError("additive_linear: empty coefficients");
  double ssq = 0.0;
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw InvalidArgumentError("additive_linear: non-finite coefficient");
    ssq += c * c;
  }
  std::vector<double> totals(coeffs.size(), 0.0);
  if (ssq > 0.0)
    for (std::size_t j = 0; j < coeffs.size(); ++j) totals[j] = coeffs[j] * coeffs[j] / ssq;
  const std::size_t d = coeffs.size();
  return ModelFunction(
      "additive-linear", d,
      [cs = std::move(coeffs)](std::span<const double> x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cs.size(); ++j) acc += cs[j] * x[j];
        return acc;
      },
      std::move(totals));
}

ModelFunction synthetic_highdim(std::size_t d, std::uint64_t seed) {
  if (d < 10) throw InvalidArgumentError("synthetic_highdim: d must be >= 10");
  Rng rng = Rng::substream(seed, "highdim");

  const std::size_t n_active = std::max<std::size_t>(3, d / 10);
  const std::size_t n_pairs = std::max<std::size_t>(2, d / 20);
  const auto order = rng.permutation(static_cast<std::uint32_t>(d));

  std::vector<std::size_t> active(order.begin(), order.begin() + static_cast<long>(n_active));
  std::vector<double> coeff(n_active);
  for (double& c : coeff) c = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);

  struct Pair {
    std::size_t p, q;
    double c;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    const std::size_t p = active[rng.uniform_index(n_active)];
    std::size_t q = p;
    while (q == p) q = active[rng.uniform_index(n_active)];
    pairs.push_back({p, q, (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.25, 1.0)});
  }

  // Variance decomposition of the construction: linear terms contribute
  // a^2/12, centered products c^2/144, and all terms are mutually orthogonal.
  double var = 0.0;
  std::vector<double> numer(d, 0.0);
  for (std::size_t k = 0; k < n_active; ++k) {
    const double v = coeff[k] * coeff[k] / 12.0;
    numer[active[k]] += v;
    var += v;
  }
  for (const auto& pr : pairs) {
    const double v = pr.c * pr.c / 144.0;
    numer[pr.p] += v;
    numer[pr.q] += v;
    var += v;
  }
  std::vector<double> totals(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) totals[j] = var > 0.0 ? numer[j] / var : 0.0;

  return ModelFunction(
      "highdim-" + std::to_string(d), d,
      [active, coeff, pairs](std::span<const double> x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < active.size(); ++k) acc += coeff[k] * x[active[k]];
        for (const auto& pr : pairs) acc += pr.c * (x[pr.p] - 0.5) * (x[pr.q] - 0.5);
        return acc;
      },
      std::move(totals));
}

ModelFunction constant_model(std::size_t d, double value) {
  return ModelFunction("constant", d, [value](std::span<const double>) { return value; },
                       std::vector<double>(d, 0.0));
}

}  // namespace floodgate
