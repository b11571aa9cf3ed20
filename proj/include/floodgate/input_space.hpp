#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodgate/rng.hpp"

namespace floodgate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class MarginalKind { Uniform };

/// One input's marginal distribution. Only Uniform is built in; the kind
/// enumeration is the extension point for further families.
struct InputMarginal {
  std::string name;
  MarginalKind kind = MarginalKind::Uniform;
  double min = 0.0;
  double max = 1.0;

  double sample(Rng& rng) const { return rng.uniform(min, max); }
  bool contains(double x) const { return x >= min && x <= max; }
};

/// Joint input distribution: ordered marginals plus independence structure.
/// Dependent inputs are supported only through a user-supplied conditional
/// sampler hook; everything built in assumes independence.
class InputSpace {
 public:
  /// Draws input j given the other coordinates of `row`.
  using ConditionalSampler =
      std::function<double(std::size_t j, std::span<const double> row, Rng& rng)>;

  explicit InputSpace(std::vector<InputMarginal> inputs);

  /// d independent uniform(lo, hi) inputs named x1..xd.
  static InputSpace uniform_cube(std::size_t d, double lo = 0.0, double hi = 1.0);

  std::size_t dimension() const { return inputs_.size(); }
  const InputMarginal& marginal(std::size_t j) const;
  const std::vector<InputMarginal>& marginals() const { return inputs_; }
  bool independent() const { return independent_; }

  /// Installs a conditional sampler for dependent inputs. Marks the space
  /// non-independent; built-in resampling then routes through the hook.
  void set_conditional_sampler(ConditionalSampler sampler);
  const ConditionalSampler& conditional_sampler() const { return conditional_; }

 private:
  std::vector<InputMarginal> inputs_;
  bool independent_ = true;
  ConditionalSampler conditional_;
};

/// n x d matrix of joint input draws with seed provenance. batch_ids, when
/// present, label contiguous equal-sized batches.
struct SampleMatrix {
  Matrix values;
  std::uint64_t seed = 0;
  std::optional<std::vector<std::int64_t>> batch_ids;

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(values.cols()); }
};

/// n x K conditionally independent redraws of input j.
struct ResampleBlock {
  std::size_t input_index = 0;
  Matrix values;
  std::uint64_t seed = 0;
};

/// n i.i.d. draws from the product of marginals; pure in (space, n, seed).
SampleMatrix sample_iid(const InputSpace& space, std::size_t n, std::uint64_t seed);

/// num_batches independent randomized Latin hypercubes of batch_size points
/// each: per dimension one point per equal-width stratum, uniformly jittered
/// within stratum, strata order independently permuted per (batch, dimension).
SampleMatrix sample_lhs_batches(const InputSpace& space, std::size_t batch_size,
                                std::size_t num_batches, std::uint64_t seed);

/// K fresh draws of input j per row, conditionally independent of column j.
/// For independent inputs the conditional law is the marginal itself. The
/// stream is derived from (seed, "resample", j), so different inputs get
/// independent blocks from the same seed.
ResampleBlock resample_conditional(const InputSpace& space, const SampleMatrix& samples,
                                   std::size_t j, std::size_t K, std::uint64_t seed);

}  // namespace floodgate
