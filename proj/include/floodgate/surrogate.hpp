#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "floodgate/dataset.hpp"
#include "floodgate/input_space.hpp"

namespace floodgate {

/// An evaluable approximation f of the computational model f*. Predictions
/// are deterministic; instances are immutable after construction and safe to
/// evaluate concurrently.
class Surrogate {
 public:
  struct Metadata {
    std::size_t training_size = 0;
    double gamma = 0.0;
    double lambda = 0.0;
    std::string provenance;
  };

  virtual ~Surrogate() = default;
  virtual std::size_t dimension() const = 0;
  virtual double predict(std::span<const double> x) const = 0;
  /// Predicts a block of points (rows); default loops over predict().
  virtual Vector predict_block(const Matrix& points) const;
  virtual const Metadata& metadata() const = 0;
};

/// Wraps any deterministic function as a surrogate (used for exact-surrogate
/// equivalence checks and analytic surrogates in tests).
class FunctionSurrogate final : public Surrogate {
 public:
  FunctionSurrogate(std::string name, std::size_t dimension, ModelFunction::Fn fn);
  explicit FunctionSurrogate(const ModelFunction& model);

  std::size_t dimension() const override { return dimension_; }
  double predict(std::span<const double> x) const override { return fn_(x); }
  const Metadata& metadata() const override { return metadata_; }

 private:
  std::size_t dimension_;
  ModelFunction::Fn fn_;
  Metadata metadata_;
};

/// Kernel ridge regression with RBF kernel k(x,x') = exp(-|x-x'|^2 / (2 g^2))
/// on inputs affinely scaled to the unit cube. Targets are centered before
/// the solve and the training mean is added back at prediction time, so a
/// constant function is recovered exactly.
class KrrSurrogate final : public Surrogate {
 public:
  KrrSurrogate(Matrix centers_scaled, Vector weights, double gamma, double lambda,
               double intercept, Vector scale_lo, Vector scale_hi, Metadata metadata);

  std::size_t dimension() const override { return static_cast<std::size_t>(centers_.cols()); }
  double predict(std::span<const double> x) const override;
  Vector predict_block(const Matrix& points) const override;
  const Metadata& metadata() const override { return metadata_; }

  const Matrix& centers_scaled() const { return centers_; }
  const Vector& weights() const { return weights_; }
  double gamma() const { return gamma_; }
  double lambda() const { return lambda_; }
  double intercept() const { return intercept_; }
  const Vector& scale_lo() const { return scale_lo_; }
  const Vector& scale_hi() const { return scale_hi_; }

 private:
  Matrix scale_rows(const Matrix& points) const;

  Matrix centers_;  // m x d, already scaled to the unit cube
  Vector weights_;
  double gamma_;
  double lambda_;
  double intercept_;
  Vector scale_lo_, scale_hi_;
  Metadata metadata_;
};

struct KrrOptions {
  /// Kernel bandwidth on unit-cube-scaled inputs; unset = median heuristic
  /// (median pairwise distance of a subsample).
  std::optional<double> gamma;
  /// Ridge parameter; unset = 1e-6 * m.
  std::optional<double> lambda;
  /// Cap on the kernel system size; larger training sets are uniformly
  /// subsampled down to this many centers.
  std::size_t max_centers = 4000;
  /// Seed for the subsampling stream when max_centers kicks in.
  std::uint64_t seed = 0;
  /// Scaling box; unset = per-dimension min/max of the training inputs.
  std::optional<std::pair<Vector, Vector>> scaling;
};

/// Fits KRR on train (which must have outputs) via an SPD factorization of
/// the ridge system. A singular system (lambda = 0 with duplicate points)
/// surfaces as NumericalError with the hint to raise lambda.
KrrSurrogate fit_krr(const EvaluatedDataset& train, const KrrOptions& options = {});

/// Convenience: scaling box taken from the sampling space rather than the data.
KrrSurrogate fit_krr(const EvaluatedDataset& train, const InputSpace& space,
                     KrrOptions options = {});

struct RelativeMse {
  double e2 = 0.0;          // mean((f*-f)^2) / sample-variance(f*)
  double se = 0.0;          // delta-method standard error of e2
  bool degenerate = false;  // zero sample variance; e2 undefined
};

/// Relative MSE of the surrogate on an evaluated dataset (>= 2 rows with f*
/// outputs), with a ratio-of-means delta-method standard error.
RelativeMse estimate_relative_mse(const Surrogate& surrogate, const EvaluatedDataset& eval);

/// Same computation from precomputed surrogate outputs at the f* rows.
RelativeMse estimate_relative_mse_from_values(std::span<const double> y_star,
                                              std::span<const double> y_surrogate);

}  // namespace floodgate
