#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodgate/dataset.hpp"
#include "floodgate/input_space.hpp"
#include "floodgate/models.hpp"
#include "floodgate/surrogate.hpp"

namespace floodgate {

enum class Method { Floodgate, Spf, SpfSurrogate, Panin };
std::string to_string(Method m);

/// Per-sample sufficient statistics for one input index j:
///   m_z[i] = (f*_i - F_i^z)^2 - (f_i - F_i^z)^2 / (K+1)
///   m[i]   = (f*_i - f_i)^2
///   v[i]   = n/(n-1) (f*_i - ybar)^2,  ybar the global output mean
/// where F_i^z averages the surrogate over the K conditional redraws of
/// input j. m and v are nonnegative by construction; m_z may be negative.
struct FloodgateTerms {
  std::size_t input_index = 0;
  std::vector<double> m_z;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t K = 1;
  std::optional<std::vector<std::int64_t>> batch_ids;

  std::size_t n() const { return m.size(); }
};

struct IntervalDiagnostics {
  double mz_bar = 0.0;
  double m_bar = 0.0;
  double v_bar = 0.0;
  std::array<std::array<double, 3>, 3> sigma{};  // sample covariance of (m_z, m, v)
  double s_lower = 0.0;
  double s_upper = 0.0;
  std::size_t n_effective = 0;  // rows, or batches on the batch-means path
  std::size_t K = 1;
  double alpha = 0.0;
  bool degenerate = false;  // v_bar == 0 branch
  std::string notes;
};

/// A confidence interval [lower, upper] for one input's total-order index,
/// clipped to [0, 1], with the underlying point estimates and diagnostics.
struct IntervalResult {
  std::size_t input_index = 0;
  Method method = Method::Floodgate;
  double lower = 0.0;
  double upper = 1.0;
  double point_lower = 0.0;  // l-hat (floodgate), S-hat (SPF), S-hat_f - B (Panin)
  double point_upper = 0.0;  // u-hat (floodgate), S-hat (SPF), S-hat_f + B (Panin)
  IntervalDiagnostics diagnostics;

  double width() const { return upper - lower; }
  bool covers(double s) const { return lower <= s && s <= upper; }
};

/// Computes the per-sample terms from raw values: f* outputs, surrogate
/// outputs at the same points, and surrogate outputs at the n x K redraws.
/// This is the arithmetic core; the spec-level entry points below feed it.
FloodgateTerms floodgate_terms_from_values(
    std::size_t input_index, std::span<const double> y_star,
    std::span<const double> f_base, const Matrix& f_resampled,
    std::optional<std::vector<std::int64_t>> batch_ids = std::nullopt);

/// Draws the conditional resample block for input j (stream derived from
/// (seed, "resample", j)), evaluates the surrogate nK times, and assembles
/// the terms. Surrogate outputs at the base points are taken from
/// data.surrogate_outputs when present (the zero-extra-cost path) and
/// computed otherwise. No f* evaluations happen here.
FloodgateTerms floodgate_terms(const EvaluatedDataset& data, const Surrogate& surrogate,
                               const InputSpace& space, std::size_t j, std::size_t K,
                               std::uint64_t seed);

/// The confidence interval for one input. If v_bar == 0 the degenerate
/// [0, 1] interval is returned. Otherwise
///   l-hat = (mz_bar - m_bar) / v_bar,   u-hat = mz_bar / v_bar,
///   s_u^2 = (S11 - 2 u S13 + u^2 S33) / v_bar^2,
///   s_l^2 = (S11 + S22 + l^2 S33 - 2 S12 + 2 l (S23 - S13)) / v_bar^2,
///   [L, U] = [l-hat - z s_l / sqrt(n), u-hat + z s_u / sqrt(n)] clipped,
/// with S the 3x3 sample covariance (divisor n-1) of the terms and
/// z the upper alpha/2 normal quantile. When batch_ids are present the
/// means and covariance are taken over per-batch means with n = #batches.
IntervalResult floodgate_interval(const FloodgateTerms& terms, double alpha);

/// Floodgate intervals for every input from one dataset: the same f* outputs
/// are reused for all d inputs, with independent per-input resample streams.
/// Total cost: n*d*K surrogate evaluations (plus n for the base predictions
/// when the dataset does not carry them), zero f* evaluations.
std::vector<IntervalResult> floodgate_all_inputs(const EvaluatedDataset& data,
                                                 const Surrogate& surrogate,
                                                 const InputSpace& space, std::size_t K,
                                                 std::uint64_t seed, double alpha);

/// Pick-freeze paired design: base points plus, per input j, the same rows
/// with input j redrawn ("pick") and everything else frozen.
struct PairedDataset {
  EvaluatedDataset base;   // X with outputs of the generating function
  Matrix picked_inputs;    // n x d; column j holds the redrawn input-j values
  Matrix paired_outputs;   // n x d; column j holds outputs at (X~_ij, Z_i)
  std::uint64_t seed = 0;
  std::size_t eval_count = 0;  // generating-function evaluations: n (d + 1)

  std::size_t n() const { return base.n(); }
  std::size_t d() const { return base.d(); }
};

/// Builds the paired design with f* = model; costs n(d+1) model evaluations.
PairedDataset build_paired_dataset(const ModelFunction& model, const InputSpace& space,
                                   std::size_t n, std::uint64_t seed);
/// Same design generated entirely from a surrogate (zero f* evaluations).
PairedDataset build_paired_dataset(const Surrogate& surrogate, const InputSpace& space,
                                   std::size_t n, std::uint64_t seed);
/// Paired design on an already-evaluated base: only the n*d pick columns are
/// freshly drawn and evaluated.
PairedDataset build_paired_dataset_from_base(const ModelFunction& model,
                                             const InputSpace& space,
                                             const SampleMatrix& base,
                                             std::span<const double> base_outputs,
                                             std::uint64_t seed);

/// Jansen pick-freeze estimate with a ratio-of-means delta-method CI:
///   S-hat = [ (1/2n) sum (y_i - y~_i)^2 ] / [ (1/(n-1)) sum (y_i - ybar)^2 ]
/// A zero denominator returns [0, 1] with S-hat = 0 (the 0/0 convention).
IntervalResult spf_jansen(const PairedDataset& pairs, std::size_t j, double alpha);

/// Identical computation on surrogate-built pairs; tagged spf-surrogate.
IntervalResult spf_surrogate(const PairedDataset& surrogate_pairs, std::size_t j,
                             double alpha);

/// Moment estimates feeding the Panin-bound interval.
struct PaninComponents {
  double s_hat_f = 0.0;     // surrogate SPF point estimate
  double se_s_hat_f = 0.0;  // its delta-method standard error
  double e2 = 0.0;          // relative-MSE estimate (E-hat squared)
  double se_e2 = 0.0;       // its delta-method standard error
  std::size_t n = 0;        // f* rows behind e2
};

/// Interval from the surrogate-error bound
///   B = min{1, E + 2 sqrt(S~), E + 2 sqrt(1 - S~)} * E,
/// with E = sqrt(e2) and plug-in S~ = clip(S-hat_f, 0, 1):
///   [S-hat_f - B - z se_lo, S-hat_f + B + z se_up] clipped to [0, 1].
/// se_lo/se_up are endpoint-level delta-method errors propagated through the
/// active branch of B; the construction is recorded in diagnostics.notes.
IntervalResult panin_interval(std::size_t input_index, const PaninComponents& parts,
                              double alpha);

/// Convenience: S-hat_f from surrogate pairs, e2 from data (surrogate outputs
/// computed if absent), then panin_interval.
IntervalResult panin_from_data(const PairedDataset& surrogate_pairs,
                               const EvaluatedDataset& data, const Surrogate& surrogate,
                               std::size_t j, double alpha);

}  // namespace floodgate
